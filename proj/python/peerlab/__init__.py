"""PEER value-representation regularizer lab.

Batches passed to the loss and metric functions are 2-D arrays with one
sample per row.
"""

from ._core import (
    ConfigError,
    DegenerateNetworkError,
    DomainError,
    GridWorld,
    Mlp,
    NumericError,
    Pendulum,
    PeerlabError,
    ProtocolError,
    ShapeError,
    combined_loss,
    cosine_similarity,
    drd_batch,
    l2_normalize,
    parse_config,
    pe_loss,
    peer_loss,
    peer_loss_grad,
    plot,
    q_gap,
    run_experiment,
    soft_update,
    td_target_dqn,
    td_target_td3,
    theorem1_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
