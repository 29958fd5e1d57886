import math
from typing import List, Optional, Tuple

from scipy import special
from typing_extensions import Annotated, Doc

from hybridaml.exceptions import EvaluationError, NumericError, TrainingError
from hybridaml.graph.models import RelGraph
from hybridaml.logger import logger
from hybridaml.metrics import evaluate_predictions
from hybridaml.rgcn.models import (
    AdamState,
    EpochRecord,
    LayerParams,
    ModelConfig,
    TrainingHistory,
)
from hybridaml.rgcn.optim import adam_step
from hybridaml.rgcn.utils import (
    backward,
    class_weights,
    forward,
    init_params,
    loss,
)


def train(
    graph: Annotated[
        RelGraph,
        Doc("Graph with nonempty `train` and `val` masks over its targets."),
    ],
    config: Annotated[ModelConfig, Doc("Architecture and optimizer settings.")],
    rng_seed: Annotated[int, Doc("Seed for parameter initialization.")],
) -> Tuple[List[LayerParams], TrainingHistory]:
    """
    Full-batch training with Adam.

    Returns the parameters from the epoch with the best validation AUC
    (selection, not early stopping: every epoch runs). When the validation
    labels hold a single class, the lowest validation loss is used instead.
    With `epochs == 0` the initial parameters and an empty history are
    returned.
    """
    train_mask, val_mask = graph.masks.train, graph.masks.val
    if not train_mask.any() or not val_mask.any():
        raise EvaluationError("training needs nonempty train and val masks")

    params = init_params(config, graph.feature_width, rng_seed)
    labels = graph.labels
    val_labels = labels[val_mask]
    use_auc = bool(val_labels.min() != val_labels.max())
    history = TrainingHistory(
        selection_metric="val_auc" if use_auc else "val_loss"
    )
    if config.epochs == 0:
        return params, history
    if not use_auc:
        logger.warning(
            "Validation split holds a single class; selecting on val loss"
        )

    weights = class_weights(labels, train_mask, config.class_weights)
    state = AdamState.initial(
        params, config.adam_beta1, config.adam_beta2, config.adam_eps
    )
    logits, cache = forward(graph, params, config)
    best_params = params
    best_key = -math.inf
    best_epoch: Optional[int] = None

    for epoch in range(1, config.epochs + 1):
        grads = backward(graph, cache, params, labels, train_mask, weights)
        try:
            params, state = adam_step(
                params, grads, state, config.learning_rate
            )
            logits, cache = forward(graph, params, config)
        except NumericError as e:
            raise TrainingError(e.message, epoch=epoch) from e

        # both losses and the val metrics describe the post-step parameters
        train_loss = loss(logits, labels, train_mask, weights)
        if not math.isfinite(train_loss):
            raise TrainingError("training loss is not finite", epoch=epoch)
        val_loss = loss(logits, labels, val_mask, weights)
        report = evaluate_predictions(
            special.expit(logits[val_mask]), val_labels, split="val"
        )
        key = report.auc if use_auc and report.auc is not None else -val_loss
        if key > best_key:
            best_key, best_params, best_epoch = key, params, epoch
        history.epochs.append(
            EpochRecord(
                epoch=epoch,
                train_loss=train_loss,
                val_loss=val_loss,
                val_accuracy=report.accuracy,
                val_f1=report.f1,
                val_auc=report.auc,
            )
        )
        if epoch % 10 == 0 or epoch == 1:
            logger.debug(
                "Epoch %d/%d: train loss %.4f, val loss %.4f, val AUC %s",
                epoch,
                config.epochs,
                train_loss,
                val_loss,
                "n/a" if report.auc is None else f"{report.auc:.4f}",
            )

    history.best_epoch = best_epoch
    logger.info(
        "Selected epoch %s of %d by %s",
        best_epoch,
        config.epochs,
        history.selection_metric,
    )
    return best_params, history

