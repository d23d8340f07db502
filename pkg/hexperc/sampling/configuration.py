"""configuration.py

Percolation Configurations: Counter-Based Sampling, Flips and Run-Length Dumps

"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import GeometryError
from ..lattice.geometry import SiteSet

logger = logging.getLogger(__name__)

OPEN, CLOSED = 1, 0

DUMP_FORMAT = "hexperc-rle"
DUMP_VERSION = 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_ROW_MIX = np.uint64(0xD1B54A32D192ED03)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)


def sample_key(seed, index):
    """64-Bit Stream Key for a (seed, sample index) Pair"""
    if seed < 0 or index < 0:
        raise ValueError("seed and sample index must be non-negative")
    return np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)[0]


def site_bits(key, coords):
    """Fair Bits for Sites, a Pure Function of (key, q, r)

    Parameters
    ----------
    key : numpy.uint64
        Stream Key from sample_key
    coords : ndarray
        (N, 2) Axial Coordinates

    Returns
    -------
    ndarray
        (N,) uint8 Bits
    """
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, 2)
    with np.errstate(over="ignore"):
        q = coords[:, 0].astype(np.uint64)
        r = coords[:, 1].astype(np.uint64)
        z = np.uint64(key) + q * _GOLDEN + r * _ROW_MIX
        z = (z ^ (z >> np.uint64(30))) * _MIX_1
        z = (z ^ (z >> np.uint64(27))) * _MIX_2
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(63)).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class Configuration:
    """
    Open / Closed State for Every Site of a Region, with Seed Provenance
    """

    region: SiteSet
    state: np.ndarray
    seed: int = -1
    sample_index: int = -1

    def __post_init__(self):
        state = np.ascontiguousarray(self.state, dtype=np.uint8).reshape(-1)
        if len(state) != len(self.region):
            raise ValueError("state length does not match region size")
        state.setflags(write=False)
        object.__setattr__(self, "state", state)

    def __len__(self):
        return len(self.region)

    @property
    def mesh(self):
        return self.region.mesh

    @property
    def open_count(self):
        return int(self.state.sum())

    def state_at(self, coords):
        """States of Sites, Raising GeometryError if Any Lies Outside the Region"""
        idx = self.region.index_of(coords)
        if np.any(idx < 0):
            raise GeometryError("queried site is outside the configuration region")
        return self.state[idx]

    def is_open(self, site):
        return bool(self.state_at(np.asarray(site).reshape(1, 2))[0] == OPEN)

    def restrict(self, sites):
        """States of a Sub-Region, in the Order of sites"""
        return self.state_at(sites.coords)

    def with_states(self, mask, value):
        """Copy with the Masked Sites Set to a Colour"""
        state = self.state.copy()
        state[np.asarray(mask, dtype=bool)] = value
        return Configuration(self.region, state, self.seed, self.sample_index)

    def color_reversed(self):
        return Configuration(self.region, 1 - self.state, self.seed, self.sample_index)


def sample(region, seed, index):
    """Samples a Critical (p = 1/2) Configuration on a Region

    Parameters
    ----------
    region : SiteSet
        Sites to Colour
    seed : int
        Run Seed
    index : int
        Sample Index

    Returns
    -------
    Configuration
    """
    if not len(region):
        raise GeometryError("empty region")
    state = site_bits(sample_key(seed, index), region.coords)
    return Configuration(region, state, int(seed), int(index))


def constant_configuration(region, value):
    """All-Open (value=1) or All-Closed (value=0) Configuration"""
    return Configuration(region, np.full(len(region), value, dtype=np.uint8))


def flip(config, site):
    """Configuration Differing from config Only at site"""
    idx = config.region.index(site)
    state = config.state.copy()
    state[idx] ^= 1
    return Configuration(config.region, state, config.seed, config.sample_index)


def _run_lengths(bits):
    if not len(bits):
        return []
    change = np.flatnonzero(np.diff(bits)) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [len(bits)])))
    return [f"{int(bits[s])}:{int(n)}" for s, n in zip(starts, lengths)]


def dump_configuration(config, path):
    """Writes a JSON Header Line Followed by a Run-Length Encoded Bit Stream

    Parameters
    ----------
    config : Configuration
        Configuration to Store
    path : str or Path
        Output File
    """
    header = {
        "format": DUMP_FORMAT,
        "version": DUMP_VERSION,
        "mesh": config.mesh,
        "seed": config.seed,
        "sample_index": config.sample_index,
        "n": len(config),
        "coords_hash": config.region.geometry_hash(),
        "coords": config.region.coords.tolist(),
    }
    with open(path, "w") as file:
        file.write(json.dumps(header, sort_keys=True) + "\n")
        file.write(" ".join(_run_lengths(config.state)) + "\n")


def load_configuration(path):
    """Reads a Configuration Written by dump_configuration"""
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0])
    if header.get("format") != DUMP_FORMAT or header.get("version") != DUMP_VERSION:
        raise ValueError(f"unsupported configuration dump in {path}")
    region = SiteSet(header["coords"], header["mesh"])
    if region.geometry_hash() != header["coords_hash"]:
        raise ValueError("configuration dump coordinates do not match their hash")
    runs = lines[1].split() if len(lines) > 1 else []
    state = np.concatenate(
        [np.full(int(n), int(bit), dtype=np.uint8) for bit, n in (run.split(":") for run in runs)]
        or [np.empty(0, dtype=np.uint8)]
    )
    if len(state) != header["n"]:
        raise ValueError("configuration dump is truncated")
    return Configuration(region, state, header["seed"], header["sample_index"])
