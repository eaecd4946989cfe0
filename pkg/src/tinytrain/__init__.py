"""A small neural-network training framework built on numpy.

Dense and convolutional networks trained with plain backpropagation, direct
feedback alignment, or a layer-wise rule that applies each layer's update as
soon as its error signal is available. Hot kernels are numba-compiled with a
pure-numpy fallback selected by the TINYTRAIN_KERNELS environment variable.
"""

from .data import Dataset, load_cifar10, load_mnist, load_mnist_idx, normalize
from .gradcheck import (GradCheckReport, alignment_angle, compare_grads,
                        finite_difference_grads, grads_as_dict)
from .kernels import BACKEND as kernel_backend
from .metrics import MetricsReport, confusion_matrix, evaluate, summarize
from .nn import (ForwardCache, Layer, Network, build_mlp, build_paper_cnn,
                 conv2d, dense, flatten, forward_pass, load_checkpoint,
                 maxpool2, save_checkpoint)
from .trainers import (AdamState, Gradients, Optimizer, TrainerConfig,
                       TrainingRun, UpdateReport, adam_update, backprop_sweep,
                       dfa_sweep, layerwise_instant_sweep,
                       make_feedback_matrices, one_hot, output_error,
                       sgd_update, train)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "Dataset", "ForwardCache", "GradCheckReport",
    "Gradients", "Layer", "MetricsReport", "Network", "Optimizer",
    "TrainerConfig", "TrainingRun", "UpdateReport", "adam_update",
    "alignment_angle", "backprop_sweep", "build_mlp", "build_paper_cnn",
    "compare_grads", "confusion_matrix", "conv2d", "dense", "dfa_sweep",
    "evaluate", "finite_difference_grads", "flatten", "forward_pass",
    "grads_as_dict", "kernel_backend", "layerwise_instant_sweep",
    "load_checkpoint", "load_cifar10", "load_mnist", "load_mnist_idx",
    "make_feedback_matrices", "maxpool2", "normalize", "one_hot",
    "output_error", "save_checkpoint", "sgd_update", "summarize", "train",
]
