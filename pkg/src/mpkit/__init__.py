"""Predictive-resampling uncertainty quantification for small neural networks.

The package fits ensembles by resampling plausible future training data:
Dirichlet-weighted bootstrap ensembles, base-measure-augmented posteriors,
and mixup-augmented predictive distributions, together with calibration
metrics, synthetic tasks, and normalized-margin diagnostics for comparing
weighted and unweighted training on separable data.
"""

from .data import (Dataset, EvalGrid, LabeledExample, dataloader, gen_synthetic_clusters,
                   load_csv, load_idx, make_grid, save_csv, save_idx)
from .metrics import CalibrationReport, evaluate, predictive_entropy, predictive_uncertainty
from .network import (Conv2D, Dense, Dropout, DropoutMask, Flatten, MaxPool2x2, ModelParams,
                      NetworkSpec, NumericError, ReLU, ShapeError, TrainConfig, cnn_spec,
                      forward, forward_batch, grad, homogeneity_degree, init_params,
                      load_params, mlp_spec, sample_dropout_mask, save_params, sgd_step,
                      soft_cross_entropy)
from .margin import (EquivalencyReport, MarginPoint, margins, normalized_margin,
                     run_equivalency_experiment)
from .posterior import (ConcentrationRatio, Ensemble, PredictiveConfig, SeparationError,
                        ensemble_predict, load_ensemble, predict_proba, save_ensemble,
                        train_bb, train_de, train_dp_mp, train_member_erm, train_mixup,
                        train_mixup_mp)
from .samplers import (AugmentationSet, GaussianJitter, HorizontalFlip, Identity,
                       MixupMeasure, PadCrop, PerturbedEmpirical, UniformBox, WeightVector,
                       mixup_pair, sample_base_measure, sample_bb_weights, sample_beta,
                       sample_dp_weights, sample_h_aug, sample_mixup, sample_pseudo_batch,
                       sample_stabilized_bb_weights)

__version__ = "0.1.0"
