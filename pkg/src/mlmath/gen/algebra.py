"""Algebra tasks built on Cayley tables and Latin squares."""
from __future__ import annotations

import numpy as np

from ..dataset import DatasetError, LabeledDataset, augment_permutations, concat, pad_matrices
from ..rng import derive_seed
from .groups import FiniteGroup, catalog, order12_groups
from .latin import gen_latin_square

SIMPLE_PAD = 70


def _permuted_copies(tables, block_shapes, pad, count, label, seed, task_id, arity=2):
    """``count`` examples cycling through ``tables``, each independently row/column permuted."""
    reps = np.arange(count) % len(tables)
    mats = pad_matrices([tables[i] for i in reps], pad, pad, dtype=np.uint8)
    blocks = np.asarray(block_shapes)[reps]
    base = LabeledDataset(mats.reshape(count, -1), np.full(count, label), arity, task_id, (pad, pad))
    aug = augment_permutations(base, "independent_rows_cols", 1, seed, block_shapes=blocks)
    return aug.subset(np.arange(count, 2 * count)), reps


def gen_group_vs_latin_task(per_class: int, seed: int, n: int = 12, pool_size: int = 100,
                            moves: int | None = None) -> LabeledDataset:
    """Permuted Cayley tables of the five order-12 groups (label 1) against
    permuted random Latin squares certified not isotopic to any group (label 0).

    The negative class cycles through a pool of ``pool_size`` Jacobson-Matthews
    squares; every example gets its own independent row and column permutation.
    """
    if n != 12:
        raise DatasetError("only n = 12 is supported")
    if per_class < 1 or pool_size < 1:
        raise DatasetError("per_class and pool_size must be positive")
    groups = order12_groups()
    pool, k = [], 0
    while len(pool) < pool_size:
        sq = gen_latin_square(n, derive_seed(seed, "latin_pool", k), moves)
        k += 1
        if sq.provenance == "non_group":
            pool.append(sq.table)
    pos, _ = _permuted_copies([g.symbols() for g in groups], [(n, n)] * len(groups), n,
                              per_class, 1, derive_seed(seed, "positives"), "group-vs-latin")
    neg, _ = _permuted_copies(pool, [(n, n)] * len(pool), n, per_class, 0,
                              derive_seed(seed, "negatives"), "group-vs-latin")
    ds = concat([pos, neg])
    perm = np.random.Generator(np.random.PCG64(derive_seed(seed, "shuffle"))).permutation(len(ds))
    ds = ds.subset(perm)
    return ds.replace(X=ds.X.astype(np.int64), meta={
        "feature_kind": "integer", "labels": {"0": "latin", "1": "group"},
        "groups": [g.name for g in groups], "pool_size": pool_size, "rejected_group_isotopes": k - pool_size,
    })


def _simple_class_tables(groups):
    return [g.symbols() for g in groups], [(g.order, g.order) for g in groups]


def gen_simple_group_task(per_class: int, seed: int, max_order: int = SIMPLE_PAD,
                          groups: list[FiniteGroup] | None = None,
                          task_id: str = "simple-groups") -> LabeledDataset:
    """Padded 70x70 Cayley tables, simple (1) against non-simple (0).

    Each class cycles through its groups so both classes get ``per_class``
    examples; simple groups, being fewer, are permuted more often.  Rows and
    columns are permuted within the table block so padding stays at the
    bottom-right.  ``meta["group_index"]`` records the source group of every
    example.
    """
    if groups is None:
        groups = catalog(max_order)
    simple = [g for g in groups if g.is_simple]
    other = [g for g in groups if not g.is_simple]
    if not simple or not other:
        raise DatasetError("catalog needs both simple and non-simple groups")
    if max(g.order for g in groups) > SIMPLE_PAD:
        raise DatasetError(f"groups larger than {SIMPLE_PAD} do not fit the padding")
    pos, pos_src = _permuted_copies(*_simple_class_tables(simple), SIMPLE_PAD, per_class, 1,
                                    derive_seed(seed, "simple"), task_id)
    neg, neg_src = _permuted_copies(*_simple_class_tables(other), SIMPLE_PAD, per_class, 0,
                                    derive_seed(seed, "non_simple"), task_id)
    names = [g.name for g in simple] + [g.name for g in other]
    src = np.concatenate([pos_src, neg_src + len(simple)])
    ds = concat([pos, neg])
    perm = np.random.Generator(np.random.PCG64(derive_seed(seed, "shuffle"))).permutation(len(ds))
    ds = ds.subset(perm)
    return ds.replace(meta={
        "feature_kind": "integer", "labels": {"0": "non-simple", "1": "simple"},
        "groups": names, "group_index": src[perm].tolist(),
        "orders": [g.order for g in simple] + [g.order for g in other],
    })


def gen_simple_group_extrapolation(per_class: int, test_copies: int, seed: int,
                                   split_order: int = 60):
    """Train on groups of order <= split_order; test on the larger ones.

    The training set is balanced as usual.  The test set holds
    ``test_copies`` permuted tables of every group of order above
    ``split_order``, so it follows the catalog's own simple/non-simple mix.
    """
    groups = catalog(SIMPLE_PAD)
    small = [g for g in groups if g.order <= split_order]
    large = [g for g in groups if g.order > split_order]
    train = gen_simple_group_task(per_class, derive_seed(seed, "train"), groups=small,
                                  task_id="simple-groups-extrapolation")
    tables, blocks = _simple_class_tables(large)
    parts = []
    for label in (0, 1):
        idx = [i for i, g in enumerate(large) if int(g.is_simple) == label]
        if not idx:
            continue
        part, _ = _permuted_copies([tables[i] for i in idx], [blocks[i] for i in idx], SIMPLE_PAD,
                                   test_copies * len(idx), label, derive_seed(seed, "test", label),
                                   "simple-groups-extrapolation")
        parts.append(part)
    test = concat(parts, meta={"feature_kind": "integer", "groups": [g.name for g in large]})
    return train, test
