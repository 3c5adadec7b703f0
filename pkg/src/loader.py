import dataclasses
import os
import typing

import numpy as np
import pandas as pd

import configs
import src.fga as fga
import src.userdata as userdata
import src.utils as utils
import src.wsn as wsn


_COLUMNS = ["source", "target", "rating", "time"]

_NAME_TO_DATASET: typing.Dict[str, wsn.Wsn] = {}


def load_rating_csv(path, scale: wsn.RatingScale = None, name=None) -> wsn.Wsn:
    """Loads a `source,target,rating[,time]` edge list (SNAP column order, header row optional).

    Ratings are divided by the scale's half-width. When a pair is rated more than once, the last
    rating wins: latest by time if every row has one, otherwise the last in the file. Node ids
    follow the order labels first appear in the file.
    """
    scale = scale or wsn.RatingScale()
    try:
        df = pd.read_csv(path, header=None, names=_COLUMNS, dtype=str, keep_default_na=False, index_col=False,
                         skip_blank_lines=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        df = pd.DataFrame(columns=_COLUMNS, dtype=str)
    except pd.errors.ParserError as e:
        raise ValueError(f"{path}: malformed rating file: {e}") from e

    df["line"] = np.arange(1, len(df) + 1)
    df = df.fillna("")
    for col in _COLUMNS:
        df[col] = df[col].str.strip()
    df = df[(df["source"] != "") | (df["target"] != "") | (df["rating"] != "")]

    if len(df) > 0 and pd.isna(pd.to_numeric(df["rating"].iloc[0], errors="coerce")):
        utils.debug(f"{path}: treating line {df['line'].iloc[0]} as a header")
        df = df.iloc[1:]

    rating = pd.to_numeric(df["rating"], errors="coerce")
    time = pd.to_numeric(df["time"], errors="coerce")
    bad = (df["source"] == "") | (df["target"] == "") | rating.isna() | ((df["time"] != "") & time.isna())
    if bad.any():
        row = df[bad].iloc[0]
        raise ValueError(f"{path}:{row['line']}: malformed row "
                         f"{','.join(x for x in row[_COLUMNS] if x != '')!r}")

    loops = df["source"] == df["target"]
    if loops.any():
        row = df[loops].iloc[0]
        raise ValueError(f"{path}:{row['line']}: self-loop on {row['source']!r}")

    out_of_scale = rating.abs() > scale.r_max
    if out_of_scale.any():
        line = df["line"][out_of_scale].iloc[0]
        raise ValueError(f"{path}:{line}: rating {rating[out_of_scale].iloc[0]} is outside "
                         f"[-{scale.r_max}, {scale.r_max}]")

    df = df.assign(rating=rating / scale.r_max, time=time)
    labels = pd.unique(np.column_stack([df["source"].to_numpy(), df["target"].to_numpy()]).ravel())

    if len(df) > 0 and df["time"].notna().all():
        df = df.sort_values("time", kind="mergesort")
    deduped = df.drop_duplicates(subset=["source", "target"], keep="last")
    if len(deduped) < len(df):
        utils.info(f"{path}: collapsed {len(df) - len(deduped)} repeated ratings")

    g = wsn.Wsn(name or os.path.splitext(os.path.basename(str(path)))[0])
    for label in labels:
        g.add_node(label)
    ids = {label: i for i, label in enumerate(labels)}
    for s, t, w in sorted(zip(deduped["source"].map(ids), deduped["target"].map(ids), deduped["rating"])):
        g.add_edge(int(s), int(t), utils.bound(float(w), -1.0, 1.0))

    utils.info(f"loaded {g.num_nodes()} nodes and {g.num_edges()} edges from {path}")
    return g


def export_rating_csv(g: wsn.Wsn, path):
    labels = g.labels()
    df = pd.DataFrame([(labels[u], labels[v], w) for u, v, w in g.edges()],
                      columns=["source", "target", "rating"])
    df.to_csv(path, index=False, float_format=configs.CSV_FLOAT_FORMAT)
    utils.info(f"wrote {len(df)} ratings to {path}")


def load_dataset(name, data_dir=None) -> wsn.Wsn:
    """One of the registered datasets (otc, alpha, rfa), cached per process. Callers must copy() before editing."""
    if name not in configs.DATASETS:
        raise ValueError(f"unknown dataset {name!r}, expected one of {sorted(configs.DATASETS)}")
    key = f"{name}@{data_dir}"
    if key not in _NAME_TO_DATASET:
        filename, r_max = configs.DATASETS[name]
        path = userdata.find_dataset(filename, data_dir=data_dir)
        if path is None:
            raise utils.InsufficientDataError(f"dataset file {filename} not found "
                                              f"(searched {userdata.get_data_dir(data_dir)})")
        _NAME_TO_DATASET[key] = load_rating_csv(path, wsn.RatingScale(r_max), name=name)
    return _NAME_TO_DATASET[key]


def clear_cache():
    _NAME_TO_DATASET.clear()


@dataclasses.dataclass(frozen=True)
class DatasetStats:
    node_count: int
    edge_count: int
    positive_edge_fraction: float
    small_indegree_fraction: float
    fair_fraction_at: typing.Dict[float, float]
    goodness_fraction_ge: typing.Dict[float, float]
    goodness_fraction_le: typing.Dict[float, float]

    def to_json(self):
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "positive_edge_fraction": self.positive_edge_fraction,
            "small_indegree_fraction": self.small_indegree_fraction,
            "fair_fraction_at": {str(k): v for k, v in self.fair_fraction_at.items()},
            "goodness_fraction_ge": {str(k): v for k, v in self.goodness_fraction_ge.items()},
            "goodness_fraction_le": {str(k): v for k, v in self.goodness_fraction_le.items()},
        }


def compute_stats(g: wsn.Wsn, scores: fga.FgaScores,
                  small_indeg=configs.STATS_SMALL_INDEG,
                  fairness_at=configs.STATS_FAIRNESS_AT,
                  goodness_ge=configs.STATS_GOODNESS_GE,
                  goodness_le=configs.STATS_GOODNESS_LE) -> DatasetStats:
    """The fractions of the dataset statistics table. Every fraction of an empty graph is 0."""
    if len(scores) != g.num_nodes():
        raise ValueError(f"scores cover {len(scores)} nodes, graph has {g.num_nodes()}")
    n = g.num_nodes()
    arrays = g.edge_arrays()
    m = len(arrays)

    def frac(count, total):
        return float(count) / total if total > 0 else 0.0

    return DatasetStats(
        node_count=n,
        edge_count=m,
        positive_edge_fraction=frac(np.count_nonzero(arrays.w > 0), m),
        small_indegree_fraction=frac(np.count_nonzero(arrays.indeg < small_indeg), n),
        fair_fraction_at={tau: frac(np.count_nonzero(scores.fairness >= tau), n) for tau in fairness_at},
        goodness_fraction_ge={tau: frac(np.count_nonzero(scores.goodness >= tau), n) for tau in goodness_ge},
        goodness_fraction_le={tau: frac(np.count_nonzero(scores.goodness <= tau), n) for tau in goodness_le},
    )
