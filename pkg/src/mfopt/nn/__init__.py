"""Hand-written neural networks: layers, packing, constraints, trainers."""

from .layers import Conv2d, Dense, Flatten, LayerSpec, MaxPool
from .network import (NetworkSpec, as_objective, elm_freeze, ffnn, flatten_params,
                      forward, forward_population, iris_ffnn, load_params,
                      save_params, table_convnet, unflatten_params)
from .train import (backprop_train, loss_and_grad, mse_loss, one_hot,
                    ridge_fit, softmax_cross_entropy)

__all__ = [
    "Conv2d", "Dense", "Flatten", "LayerSpec", "MaxPool",
    "NetworkSpec", "as_objective", "elm_freeze", "ffnn", "flatten_params",
    "forward", "forward_population", "iris_ffnn", "load_params",
    "save_params", "table_convnet", "unflatten_params",
    "backprop_train", "loss_and_grad", "mse_loss", "one_hot",
    "ridge_fit", "softmax_cross_entropy",
]
