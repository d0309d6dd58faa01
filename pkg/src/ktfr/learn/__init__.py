"""Gradient learning of time-shared kernels with a linear pooled head."""
from .data import LabeledSet, chirp_task, split
from .features import PooledFeatureEngine
from .head import (LOG_OFFSET, ClassifierHead, cross_entropy, forward_head, head_gradient,
                   pool_features, predict, softmax)
from .io import read_checkpoint, read_curve, write_checkpoint, write_curve
from .params import (CONSTRAINT_EPS, Covariances, UnconstrainedParams, constrain,
                     floor_spreads, from_covariances, to_grid)
from .train import (Adam, DivergenceError, FrontEnd, Model, TrainConfig, TrainResult, evaluate,
                    init_model, loss_and_grad, model_grid, project_feasible, train)
