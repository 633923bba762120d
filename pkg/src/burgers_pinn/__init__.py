"""Physics-informed neural network for the viscous Burgers equation, built on a
small forward-over-reverse autodiff engine, with Adam, Adamax, RMSprop and
DiffGrad optimizers and two independent reference solvers."""

from .autodiff import Dual2, Tape
from .network import MLPConfig, forward, init, param_count, predict
from .optim import LrSchedule, Optimizer
from .physics import BurgersProblem, LossBreakdown, loss, loss_gradient, residual
from .sampler import TrainingSet, sample_lhs, sample_uniform

__version__ = "0.1.0"
