"""Grid/spectral representation of periodic vector fields on the unit 3-torus.

Conventions (fixed throughout the package):
  * torus is [0,1)^3, grid point j maps to coordinate j/n,
  * Fourier coefficient F(f)(k) = mean over the grid of f * exp(-2*pi*i k.x),
    so F(1)(0) = 1 and f(x) = sum_k F(f)(k) exp(+2*pi*i k.x),
  * arrays are shaped (n, n, n) with axes (x, y, z); the flat "x-fastest"
    order of the VF3 file format corresponds to ravel(order="F").

All operations are pure functions of immutable inputs.  The wavenumber-mesh
cache is keyed by n and guarded by functools.lru_cache, which is safe to
share across threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

VF3_MAGIC = b"VF3F"
VF3_VERSION = 1


class SpectralError(ValueError):
    """Invariant violation in a spectral operation."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform n^3 sampling of the unit torus; n must be a power of two, n >= 8."""

    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise SpectralError(f"grid size must be a power of two >= 8, got {self.n}")
        if self.length != 1.0:
            raise SpectralError("only the unit-period torus is supported")

    def coords(self):
        """Meshgrid (X, Y, Z) of sample coordinates, axes (x, y, z)."""
        x = np.arange(self.n) / self.n
        return np.meshgrid(x, x, x, indexing="ij")


@lru_cache(maxsize=16)
def wavenumbers(n: int):
    """Integer wavenumber meshes (KX, KY, KZ), each shaped (n, n, n), read-only."""
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
    for a in (kx, ky, kz):
        a.setflags(write=False)
    return kx, ky, kz


@lru_cache(maxsize=16)
def derivative_wavenumbers(n: int):
    """Wavenumber meshes with the Nyquist mode (k = -n/2) zeroed.

    Used by all derivative operators so that derivatives of real fields
    stay real.
    """
    kx, ky, kz = wavenumbers(n)
    out = []
    for a in (kx, ky, kz):
        b = a.copy()
        b[b == -(n // 2)] = 0
        b.setflags(write=False)
        out.append(b)
    return tuple(out)


@dataclass
class VectorField3:
    """Real 3-component field sampled on an n^3 grid, components shaped (3, n, n, n)."""

    grid: GridSpec
    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=np.float64)
        n = self.grid.n
        if c.shape != (3, n, n, n):
            raise SpectralError(f"component shape {c.shape} != (3, {n}, {n}, {n})")
        if not np.all(np.isfinite(c)):
            raise SpectralError("non-finite samples in VectorField3")
        self.components = c

    @classmethod
    def zero(cls, grid: GridSpec) -> "VectorField3":
        return cls(grid, np.zeros((3, grid.n, grid.n, grid.n)))

    def copy(self) -> "VectorField3":
        return VectorField3(self.grid, self.components.copy())

    def __add__(self, other: "VectorField3") -> "VectorField3":
        return VectorField3(self.grid, self.components + other.components)

    def __sub__(self, other: "VectorField3") -> "VectorField3":
        return VectorField3(self.grid, self.components - other.components)

    def __mul__(self, s: float) -> "VectorField3":
        return VectorField3(self.grid, self.components * s)

    __rmul__ = __mul__


@dataclass
class SpectralField3:
    """Fourier coefficients of a 3-component field, indexed in numpy fftn layout."""

    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128)
        n = self.grid.n
        if c.shape != (3, n, n, n):
            raise SpectralError(f"coefficient shape {c.shape} != (3, {n}, {n}, {n})")
        self.coefficients = c


@dataclass
class Multiplier:
    """Fourier multiplier k -> closed complex unit disk, evaluated on integer meshes.

    ``fn`` receives integer arrays (kx, ky, kz) and must return an array of
    values with modulus <= 1.  ``support_radius`` is optional metadata.
    """

    fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    label: str = "multiplier"
    support_radius: float | None = None

    def sample(self, n: int) -> np.ndarray:
        kx, ky, kz = wavenumbers(n)
        vals = np.asarray(self.fn(kx, ky, kz), dtype=np.complex128)
        if vals.shape != kx.shape:
            vals = np.broadcast_to(vals, kx.shape).astype(np.complex128)
        bound = np.max(np.abs(vals))
        if bound > 1.0 + 1e-12:
            raise SpectralError(
                f"multiplier '{self.label}' leaves the unit disk: max |phi| = {bound:.6g}"
            )
        return vals


def identity_multiplier() -> Multiplier:
    return Multiplier(lambda kx, ky, kz: np.ones(kx.shape), label="identity")


def ball_multiplier(radius: float) -> Multiplier:
    """Sharp cutoff 1{|k| <= radius}."""

    def fn(kx, ky, kz):
        return (kx * kx + ky * ky + kz * kz <= radius * radius).astype(float)

    return Multiplier(fn, label=f"ball({radius})", support_radius=radius)


def single_mode_multiplier(k0) -> Multiplier:
    k0 = tuple(int(v) for v in k0)

    def fn(kx, ky, kz):
        return ((kx == k0[0]) & (ky == k0[1]) & (kz == k0[2])).astype(float)

    return Multiplier(fn, label=f"mode{k0}")


def forward_transform(f: VectorField3) -> SpectralField3:
    """F(f)(k), normalized so the k = 0 coefficient is the grid mean."""
    n = f.grid.n
    coeffs = np.fft.fftn(f.components, axes=(1, 2, 3)) / n**3
    return SpectralField3(f.grid, coeffs)


def inverse_transform(c: SpectralField3) -> VectorField3:
    n = c.grid.n
    phys = np.fft.ifftn(c.coefficients, axes=(1, 2, 3)) * n**3
    return VectorField3(c.grid, phys.real)


def inverse_transform_complex(c: SpectralField3) -> np.ndarray:
    """Complex samples of the inverse transform (no reality projection)."""
    n = c.grid.n
    return np.fft.ifftn(c.coefficients, axes=(1, 2, 3)) * n**3


def coefficient_at(c: SpectralField3, k) -> np.ndarray:
    """The (3,) coefficient vector at integer frequency k."""
    n = c.grid.n
    i, j, l = (int(v) % n for v in k)
    return c.coefficients[:, i, j, l]


def reflect_spectrum(c: np.ndarray) -> np.ndarray:
    """Coefficients of k -> -k (index reversal with wraparound), fftn layout."""
    out = c[..., ::-1, ::-1, ::-1]
    return np.roll(out, 1, axis=(-3, -2, -1))


def apply_multiplier_complex(phi: Multiplier, f: VectorField3) -> np.ndarray:
    """Complex samples of P_phi f; used where the imaginary residue matters."""
    vals = phi.sample(f.grid.n)
    c = forward_transform(f)
    return inverse_transform_complex(SpectralField3(f.grid, c.coefficients * vals))


def apply_multiplier(phi: Multiplier, f: VectorField3) -> VectorField3:
    """Real part of P_phi f.

    For multipliers with phi(-k) = conj(phi(k)) the imaginary residue is at
    round-off level; in general (e.g. single-mode projections) the real part
    is what is returned.
    """
    return VectorField3(f.grid, apply_multiplier_complex(phi, f).real)


def apply_multiplier_spectral(phi: Multiplier, c: SpectralField3) -> SpectralField3:
    vals = phi.sample(c.grid.n)
    return SpectralField3(c.grid, c.coefficients * vals)


def curl(f: VectorField3) -> VectorField3:
    """Spectral curl; exact on band-limited fields, Nyquist mode dropped."""
    n = f.grid.n
    kx, ky, kz = derivative_wavenumbers(n)
    c = np.fft.fftn(f.components, axes=(1, 2, 3))
    tp = 2j * np.pi
    out = np.empty_like(c)
    out[0] = tp * (ky * c[2] - kz * c[1])
    out[1] = tp * (kz * c[0] - kx * c[2])
    out[2] = tp * (kx * c[1] - ky * c[0])
    return VectorField3(f.grid, np.fft.ifftn(out, axes=(1, 2, 3)).real)


def divergence(f: VectorField3) -> np.ndarray:
    """Spectral divergence, returned as an (n, n, n) scalar array."""
    kx, ky, kz = derivative_wavenumbers(f.grid.n)
    c = np.fft.fftn(f.components, axes=(1, 2, 3))
    d = 2j * np.pi * (kx * c[0] + ky * c[1] + kz * c[2])
    return np.fft.ifftn(d).real


def gradient(scalar: np.ndarray, grid: GridSpec) -> VectorField3:
    kx, ky, kz = derivative_wavenumbers(grid.n)
    c = np.fft.fftn(scalar)
    tp = 2j * np.pi
    comps = np.stack(
        [
            np.fft.ifftn(tp * kx * c).real,
            np.fft.ifftn(tp * ky * c).real,
            np.fft.ifftn(tp * kz * c).real,
        ]
    )
    return VectorField3(grid, comps)


def mean(f: VectorField3) -> np.ndarray:
    return f.components.mean(axis=(1, 2, 3))


def l2_norm(f: VectorField3) -> float:
    return float(np.sqrt(np.mean(np.sum(f.components**2, axis=0))))


def linf_norm(f: VectorField3) -> float:
    return float(np.max(np.sqrt(np.sum(f.components**2, axis=0))))


def sobolev_norm(f: VectorField3, s: float) -> float:
    """Homogeneous H^s norm: (sum over k != 0 of |k|^{2s} |F(f)(k)|^2)^{1/2}."""
    kx, ky, kz = wavenumbers(f.grid.n)
    k2 = (kx * kx + ky * ky + kz * kz).astype(np.float64)
    c = forward_transform(f).coefficients
    w = np.where(k2 > 0, k2**s, 0.0)
    return float(np.sqrt(np.sum(w * np.sum(np.abs(c) ** 2, axis=0))))


def leray_project(f: VectorField3) -> VectorField3:
    """Divergence-free (Leray) projection, spectral."""
    n = f.grid.n
    kx, ky, kz = wavenumbers(n)
    k2 = (kx * kx + ky * ky + kz * kz).astype(np.float64)
    k2safe = np.where(k2 == 0, 1.0, k2)
    c = np.fft.fftn(f.components, axes=(1, 2, 3))
    kdot = (kx * c[0] + ky * c[1] + kz * c[2]) / k2safe
    c[0] -= kx * kdot
    c[1] -= ky * kdot
    c[2] -= kz * kdot
    return VectorField3(f.grid, np.fft.ifftn(c, axes=(1, 2, 3)).real)


def divergence_residual(f: VectorField3) -> float:
    """sup |div f| / (2 pi n_active * sup |f|), a scale-free solenoidality check."""
    d = divergence(f)
    scale = linf_norm(f)
    if scale == 0.0:
        return 0.0
    kx, ky, kz = wavenumbers(f.grid.n)
    c = forward_transform(f).coefficients
    mag = np.sum(np.abs(c), axis=0)
    active = mag > 1e-13 * np.max(mag) if np.max(mag) > 0 else mag > 0
    kmax = 1.0
    if np.any(active):
        kmax = max(1.0, float(np.sqrt(np.max((kx**2 + ky**2 + kz**2)[active]))))
    return float(np.max(np.abs(d)) / (2 * np.pi * kmax * scale))


def assert_divergence_free(f: VectorField3, tol: float = 1e-8, what: str = "field"):
    res = divergence_residual(f)
    if res > tol:
        raise SpectralError(f"{what} is not divergence-free: residual {res:.3e} > {tol:.1e}")


# ---------------------------------------------------------------------------
# De-aliased quadratic quadrature

def _pad_spectrum(c: np.ndarray, n: int, m: int) -> np.ndarray:
    """Zero-embed an (n,n,n) fftn-layout spectrum into (m,m,m), m >= n."""
    shifted = np.fft.fftshift(c)
    out = np.zeros((m, m, m), dtype=np.complex128)
    lo = (m - n) // 2
    out[lo : lo + n, lo : lo + n, lo : lo + n] = shifted
    return np.fft.ifftshift(out)


def upsample_scalar(values: np.ndarray, n: int, m: int) -> np.ndarray:
    """Trigonometric upsampling of an (n,n,n) real scalar to an (m,m,m) grid."""
    c = np.fft.fftn(values) / n**3
    return np.fft.ifftn(_pad_spectrum(c, n, m)).real * m**3


def mean_dot_dealiased(u: VectorField3, v: VectorField3) -> float:
    """Integral of u . v over the torus via a 2x zero-padded product grid.

    Exact for band-limited factors: the product's full bandwidth fits on the
    doubled grid, so the quadrature is alias-free.
    """
    n = u.grid.n
    m = 2 * n
    total = 0.0
    for i in range(3):
        a = upsample_scalar(u.components[i], n, m)
        b = upsample_scalar(v.components[i], n, m)
        total += float(np.mean(a * b))
    return total


def dealiased_product_field(a: np.ndarray, b: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Band-limited projection of the pointwise product of two scalars."""
    n = grid.n
    m = 2 * n
    prod = upsample_scalar(a, n, m) * upsample_scalar(b, n, m)
    c = np.fft.fftn(prod) / m**3
    shifted = np.fft.fftshift(c)
    lo = (m - n) // 2
    block = shifted[lo : lo + n, lo : lo + n, lo : lo + n]
    return np.fft.ifftn(np.fft.ifftshift(block)).real * n**3


# ---------------------------------------------------------------------------
# Simple analytic constructors

def beltrami_field(grid: GridSpec) -> VectorField3:
    """u = (sin 2 pi z, cos 2 pi z, 0); curl u = 2 pi u, helicity 2 pi."""
    _, _, z = grid.coords()
    comps = np.stack([np.sin(2 * np.pi * z), np.cos(2 * np.pi * z), np.zeros_like(z)])
    return VectorField3(grid, comps)


def shear_field(grid: GridSpec, f_coeffs: dict, g_coeffs: dict) -> VectorField3:
    """u(x) = (f(x3), g(x3), 0) from integer-frequency cosine/sine data.

    ``f_coeffs``/``g_coeffs`` map integer frequency k >= 0 to an (a, b) pair
    meaning a*cos(2 pi k z) + b*sin(2 pi k z).
    """
    _, _, z = grid.coords()

    def build(coeffs):
        out = np.zeros_like(z)
        for k, (a, b) in coeffs.items():
            out += a * np.cos(2 * np.pi * k * z) + b * np.sin(2 * np.pi * k * z)
        return out

    comps = np.stack([build(f_coeffs), build(g_coeffs), np.zeros_like(z)])
    return VectorField3(grid, comps)


def random_band_limited(grid: GridSpec, band: int, seed: int, divergence_free=False) -> VectorField3:
    """Random real field with spectrum sharply truncated to |k| <= band."""
    rng = np.random.default_rng(seed)
    raw = VectorField3(grid, rng.standard_normal((3, grid.n, grid.n, grid.n)))
    out = apply_multiplier(ball_multiplier(band), raw)
    if divergence_free:
        out = leray_project(out)
    nrm = l2_norm(out)
    if nrm > 0:
        out = out * (1.0 / nrm)
    return out


# ---------------------------------------------------------------------------
# VF3 file format

def write_vf3(path, f: VectorField3, metadata: dict | None = None):
    """Write the VF3 binary format; optional JSON sidecar at <path>.json.

    Layout: magic 'VF3F', u32 LE version = 1, u32 LE n, then 3*n^3 f64 LE,
    component-major, x-fastest within each component.
    """
    path = Path(path)
    n = f.grid.n
    with open(path, "wb") as fh:
        fh.write(VF3_MAGIC)
        fh.write(struct.pack("<II", VF3_VERSION, n))
        for i in range(3):
            fh.write(np.ascontiguousarray(f.components[i].ravel(order="F"), dtype="<f8").tobytes())
    if metadata is not None:
        with open(path.with_name(path.name + ".json"), "w") as fh:
            json.dump(metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_vf3(path) -> VectorField3:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != VF3_MAGIC:
            raise SpectralError(f"bad magic {magic!r} in {path}")
        version, n = struct.unpack("<II", fh.read(8))
        if version != VF3_VERSION:
            raise SpectralError(f"unsupported VF3 version {version}")
        grid = GridSpec(n)
        comps = np.empty((3, n, n, n))
        count = n**3
        for i in range(3):
            flat = np.frombuffer(fh.read(8 * count), dtype="<f8", count=count)
            comps[i] = flat.reshape((n, n, n), order="F")
    return VectorField3(grid, comps)


def read_vf3_metadata(path) -> dict | None:
    side = Path(str(path) + ".json")
    if side.exists():
        with open(side) as fh:
            return json.load(fh)
    return None
