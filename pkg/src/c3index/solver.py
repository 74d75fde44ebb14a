"""Fixed-point solvers for PQI, ACI, AAI, PCI and the combined C3 score.

Every loop is a Jacobi sweep: the new iterate is computed entirely from the
previous one. Sparse products are evaluated row block by row block, each
row summed in stored (sorted) column order, so results do not depend on
the number of worker threads.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .netbuild import MultilayerNetwork

log = logging.getLogger(__name__)

ACI_MODES = ("weighted", "literal")
AAI_MODES = ("undamped", "damped")
C3_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    theta: float = 0.5
    alpha: float = 0.0
    tol: float = 1e-9
    max_iter: int = 200
    aci_edge_weighting: str = "weighted"
    aai_damping: str = "undamped"
    outer_max_iter: int = 50
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1 or self.outer_max_iter < 1:
            raise ValueError("iteration caps must be positive")
        if self.aci_edge_weighting not in ACI_MODES:
            raise ValueError(f"aci_edge_weighting must be one of {ACI_MODES}")
        if self.aai_damping not in AAI_MODES:
            raise ValueError(f"aai_damping must be one of {AAI_MODES}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class ConvergenceLog:
    loop: str
    deltas: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.deltas)

    @property
    def final_delta(self) -> float:
        return self.deltas[-1] if self.deltas else 0.0


@dataclass(frozen=True)
class ScoreVector:
    ids: tuple
    values: np.ndarray
    kind: str
    normalized: bool = False

    def __post_init__(self):
        if len(self.ids) != len(self.values):
            raise ValueError("ids and values differ in length")

    def __getitem__(self, node_id):
        return float(self.values[self.ids.index(node_id)])

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.values.tolist()))

    def to_normalized(self) -> "ScoreVector":
        total = float(self.values.sum())
        vals = self.values / total if total > 0 else np.zeros_like(self.values)
        return ScoreVector(self.ids, vals, self.kind, normalized=True)


@dataclass
class C3Result:
    """Raw, unit-sum and display-scaled author scores plus paper PQI.

    Display values are multiplied by the number of authors so that the mean
    ``c3_disp`` is 1. Components are scaled by the same factor times theta,
    which makes ``c3_disp - (aci_disp + aai_disp + pci_disp)`` the same
    constant, ``N * (1 - theta) / sum(c3_raw)``, for every author.
    """

    theta: float
    pqi: ScoreVector
    aci: ScoreVector
    aai: ScoreVector
    pci: ScoreVector
    c3: ScoreVector
    logs: dict
    aci_norm: Optional[ScoreVector] = None
    aai_norm: Optional[ScoreVector] = None
    pci_norm: Optional[ScoreVector] = None
    c3_norm: Optional[ScoreVector] = None
    display: dict = field(default_factory=dict)

    @property
    def author_ids(self) -> tuple:
        return self.c3.ids

    @property
    def converged(self) -> bool:
        return all(lg.converged for lg in self.logs.values())

    def component(self, name: str) -> ScoreVector:
        return {"ACI": self.aci, "AAI": self.aai, "PCI": self.pci, "C3": self.c3}[name.upper()]


class _Operator:
    """Row-blocked CSR matrix for thread-count-independent mat-vec products."""

    def __init__(self, m: sp.csr_matrix, pool: Optional[ThreadPoolExecutor], n_blocks: int):
        m = sp.csr_matrix(m)
        m.sort_indices()
        self.shape = m.shape
        self.pool = pool
        if pool is None or n_blocks <= 1 or m.shape[0] < 2 * n_blocks:
            self.blocks = [m]
        else:
            edges = np.linspace(0, m.shape[0], n_blocks + 1).astype(int)
            self.blocks = [m[a:b] for a, b in zip(edges[:-1], edges[1:])]

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        if len(self.blocks) == 1:
            return self.blocks[0] @ x
        return np.concatenate(list(self.pool.map(lambda b: b @ x, self.blocks)))


def _inverse(v: np.ndarray) -> np.ndarray:
    out = np.zeros(len(v), dtype=np.float64)
    nz = v > 0
    out[nz] = 1.0 / v[nz]
    return out


def _pool(cfg: SolverConfig):
    return ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None


def _damped_iteration(op: _Operator, n: int, cfg: SolverConfig, name: str, x0=None):
    theta = cfg.theta
    x = np.ones(n) if x0 is None else x0.copy()
    lg = ConvergenceLog(name)
    for _ in range(cfg.max_iter):
        nxt = (1.0 - theta) + theta * (op @ x)
        delta = float(np.abs(nxt - x).sum())
        lg.deltas.append(delta)
        x = nxt
        if delta < cfg.tol:
            lg.converged = True
            break
    if not lg.converged:
        log.info("%s did not converge in %d iterations (L1 delta %.3g)", name, cfg.max_iter, lg.final_delta)
    return x, lg


def _transition_pqi(net: MultilayerNetwork) -> sp.csr_matrix:
    adj = net.paper_layer.adj
    # row i of the result collects citers k of paper i with weight 1/outdeg(k)
    return (adj.T @ sp.diags(_inverse(net.paper_layer.out_degree.astype(float)))).tocsr()


def _transition_aci(net: MultilayerNetwork, mode: str) -> sp.csr_matrix:
    w = net.author_citation_layer.weights
    inv = sp.diags(_inverse(net.author_citation_layer.out_strength))
    if mode == "literal":
        w = w.copy()
        w.data[:] = 1.0
    return (w.T @ inv).tocsr()


def _transition_aai(net: MultilayerNetwork) -> sp.csr_matrix:
    w = net.coauthorship_layer.weights
    return (w @ sp.diags(_inverse(net.coauthorship_layer.strength))).tocsr()


def solve_pqi(net: MultilayerNetwork, cfg: SolverConfig = SolverConfig(), _pool_=None):
    """Paper quality scores, starting from 1 for every paper.

    Papers citing nothing pass no score on; their mass is not redistributed.
    Returns ``(ScoreVector, ConvergenceLog)``.
    """
    if net.n_papers == 0:
        raise ValueError("paper layer is empty")
    op = _Operator(_transition_pqi(net), _pool_, cfg.threads)
    x, lg = _damped_iteration(op, net.n_papers, cfg, "PQI")
    return ScoreVector(net.paper_ids, x, "PQI"), lg


def solve_aci(net: MultilayerNetwork, cfg: SolverConfig = SolverConfig(), _pool_=None):
    """Author citation scores on the weighted author-citation layer.

    In ``weighted`` mode citer k passes ``w(k->j) * ACI_k / outstrength(k)`` to
    j; in ``literal`` mode the edge weight is left out of the numerator.
    """
    if net.n_authors == 0:
        raise ValueError("author layers are empty")
    op = _Operator(_transition_aci(net, cfg.aci_edge_weighting), _pool_, cfg.threads)
    x, lg = _damped_iteration(op, net.n_authors, cfg, "ACI")
    return ScoreVector(net.author_ids, x, "ACI"), lg


def solve_aai(net: MultilayerNetwork, cfg: SolverConfig = SolverConfig(), _pool_=None):
    """Coauthorship scores.

    Undamped mode runs the plain weighted random-walk flow from 1 on every
    author with a coauthor (isolated authors stay at 0). The returned vector
    is the mean of the last two iterates, which removes the period-2
    oscillation of bipartite components; convergence is tested on that mean.
    Damped mode adds the usual ``(1 - theta) + theta * (...)`` form.
    """
    n = net.n_authors
    if n == 0:
        raise ValueError("author layers are empty")
    op = _Operator(_transition_aai(net), _pool_, cfg.threads)
    x0 = (net.coauthorship_layer.strength > 0).astype(np.float64)
    if cfg.aai_damping == "damped":
        x, lg = _damped_iteration(op, n, cfg, "AAI", x0=x0)
        return ScoreVector(net.author_ids, x, "AAI"), lg

    lg = ConvergenceLog("AAI")
    x = x0
    avg = x0
    for _ in range(cfg.max_iter):
        nxt = op @ x
        new_avg = 0.5 * (x + nxt)
        delta = float(np.abs(new_avg - avg).sum())
        lg.deltas.append(delta)
        x, avg = nxt, new_avg
        if delta < cfg.tol:
            lg.converged = True
            break
    if not lg.converged:
        log.info("AAI did not converge in %d iterations (L1 delta %.3g)", cfg.max_iter, lg.final_delta)
    return ScoreVector(net.author_ids, avg, "AAI"), lg


def solve_pci_c3(
    net: MultilayerNetwork,
    cfg: SolverConfig,
    pqi: ScoreVector,
    aci: ScoreVector,
    aai: ScoreVector,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
    _pool_=None,
) -> C3Result:
    """Share paper credit among authors and combine the three components.

    With ``alpha == 0`` each paper's PQI is split evenly among its authors
    in a single pass. Otherwise an outer loop alternates: author weights
    ``c3**alpha`` (c3 kept at unit sum) decide the split, then c3 is
    recomputed from the new PCI. ``callback(m, pci, c3_raw)`` is invoked
    after every outer iteration.
    """
    theta, alpha = cfg.theta, cfg.alpha
    inc = net.incidence
    inc_op = _Operator(inc, _pool_, cfg.threads)
    inc_t_op = _Operator(inc.T.tocsr(), _pool_, cfg.threads)
    n = net.n_authors
    lg = ConvergenceLog("PCI-C3")

    if alpha == 0:
        n_auth = np.asarray(inc.sum(axis=1)).ravel()
        pci = inc_t_op @ (pqi.values * _inverse(n_auth))
        c3_raw = (1.0 - theta) + theta * (aci.values + aai.values + pci)
        lg.deltas.append(0.0)
        lg.converged = True
        if callback is not None:
            callback(0, pci, c3_raw)
    else:
        c3n = np.full(n, 1.0 / n)
        for m in range(cfg.outer_max_iter):
            floored = c3n < C3_FLOOR
            if floored.any():
                log.warning("flooring %d C3 values at %g before exponentiation", int(floored.sum()), C3_FLOOR)
            wts = np.maximum(c3n, C3_FLOOR) ** alpha
            denom = inc_op @ wts
            pci = wts * (inc_t_op @ (pqi.values * _inverse(denom)))
            c3_raw = (1.0 - theta) + theta * (aci.values + aai.values + pci)
            nxt = c3_raw / c3_raw.sum()
            delta = float(np.abs(nxt - c3n).sum())
            lg.deltas.append(delta)
            c3n = nxt
            if callback is not None:
                callback(m, pci, c3_raw)
            if delta < cfg.tol:
                lg.converged = True
                break
        if not lg.converged:
            log.info("PCI/C3 coupling did not converge in %d outer iterations", cfg.outer_max_iter)

    ids = net.author_ids
    res = C3Result(
        theta=theta,
        pqi=pqi,
        aci=aci,
        aai=aai,
        pci=ScoreVector(ids, pci, "PCI"),
        c3=ScoreVector(ids, c3_raw, "C3"),
        logs={"PCI-C3": lg},
    )
    return display_scale(res, n)


def display_scale(result: C3Result, n_authors: int) -> C3Result:
    """Fill unit-sum vectors and display values (mean C3 display equal to 1)."""
    total = float(result.c3.values.sum())
    factor = n_authors / total
    disp = {
        "c3": factor * result.c3.values,
        "aci": factor * result.theta * result.aci.values,
        "aai": factor * result.theta * result.aai.values,
        "pci": factor * result.theta * result.pci.values,
    }
    return replace(
        result,
        aci_norm=result.aci.to_normalized(),
        aai_norm=result.aai.to_normalized(),
        pci_norm=result.pci.to_normalized(),
        c3_norm=result.c3.to_normalized(),
        display=disp,
    )


def solve(net: MultilayerNetwork, cfg: SolverConfig = SolverConfig(), callback=None) -> C3Result:
    """Run every loop and return the combined result with all convergence logs."""
    pool = _pool(cfg)
    try:
        pqi, lg_pqi = solve_pqi(net, cfg, pool)
        aci, lg_aci = solve_aci(net, cfg, pool)
        aai, lg_aai = solve_aai(net, cfg, pool)
        res = solve_pci_c3(net, cfg, pqi, aci, aai, callback=callback, _pool_=pool)
    finally:
        if pool is not None:
            pool.shutdown()
    res.logs = {"PQI": lg_pqi, "ACI": lg_aci, "AAI": lg_aai, **res.logs}
    return res
