"""Smooth radial kernels: the plateau bump class, dyadic shell families, and
Schwartz mollifier multipliers with an admissibility test.

The canonical plateau/support defaults (1/4, 1) are a choice of this package;
nothing downstream depends on them beyond the recorded metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spectral import Multiplier, SpectralError


def _ramp(t):
    """exp(1 - 1/(1 - t^2)) on [0, 1): 1 at t = 0, -> 0 as t -> 1, monotone."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = t < 1.0
    ti = np.clip(t[inside], 0.0, 1.0 - 1e-15)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti**2))
    return out


@dataclass(frozen=True)
class ClassAKernel:
    """Even bump on R: 1 on [-delta, delta], 0 outside [-support, support],
    monotone ramp in between, evaluated on Z^3 through |k|."""

    delta: float = 0.25
    support: float = 1.0

    def __post_init__(self):
        if not (0 < self.delta < self.support):
            raise SpectralError(
                f"need 0 < delta < support, got delta={self.delta}, support={self.support}"
            )

    def profile(self, x):
        """Pointwise value of the bump at |x| (vectorized)."""
        x = np.abs(np.asarray(x, dtype=np.float64))
        t = (x - self.delta) / (self.support - self.delta)
        out = np.where(x <= self.delta, 1.0, _ramp(np.clip(t, 0.0, 1.0)))
        return np.where(x >= self.support, 0.0, out)

    def multiplier(self) -> Multiplier:
        def fn(kx, ky, kz):
            return self.profile(np.sqrt(kx * kx + ky * ky + kz * kz))

        return Multiplier(fn, label=f"classA(d={self.delta},s={self.support})",
                          support_radius=self.support)

    def mollifier(self, eps: float) -> "MollifierMultiplier":
        return MollifierMultiplier(kind="classA", eps=eps, delta=self.delta,
                                   support=self.support)

    def overlap_width(self) -> int:
        """M such that shells separated by more than M have disjoint supports."""
        return int(np.ceil(np.log2(self.support / self.delta))) + 1


def make_class_a(delta: float, support: float) -> ClassAKernel:
    return ClassAKernel(delta, support)


@dataclass(frozen=True)
class ShellFamily:
    """Dyadic shell multipliers generated from a ClassAKernel base.

    shell 0 is the base bump itself; shell m >= 1 at frequency k is
    base(2^-m k) - base(2^-(m-1) k), which telescopes exactly to
    base(2^-M k) when summed for m <= M.
    """

    base: ClassAKernel

    def shell_profile(self, m: int, x):
        if m < 0:
            raise SpectralError("shell index must be >= 0")
        if m == 0:
            return self.base.profile(x)
        x = np.asarray(x, dtype=np.float64)
        return self.base.profile(x / 2.0**m) - self.base.profile(x / 2.0 ** (m - 1))

    def shell_multiplier(self, m: int) -> Multiplier:
        def fn(kx, ky, kz):
            return self.shell_profile(m, np.sqrt(kx * kx + ky * ky + kz * kz))

        return Multiplier(fn, label=f"shell[{m}]", support_radius=2.0**m * self.base.support)

    def partial_sum(self, M: int, x):
        out = self.shell_profile(0, x)
        for m in range(1, M + 1):
            out = out + self.shell_profile(m, x)
        return out


def shell_multiplier(fam: ShellFamily, m: int) -> Multiplier:
    return fam.shell_multiplier(m)


@dataclass(frozen=True)
class MollifierMultiplier:
    """Multiplier k -> profile(eps * |k|) with profile(0) = 1, |profile| <= 1.

    kind 'gaussian' uses exp(-s^2); kind 'classA' uses a plateau bump;
    eps = 0 is the Dirac convention (multiplier identically 1).
    """

    kind: str = "gaussian"
    eps: float = 0.1
    delta: float = 0.25
    support: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "classA"):
            raise SpectralError(f"unknown mollifier kind {self.kind!r}")
        if self.eps < 0:
            raise SpectralError("eps must be >= 0")

    def profile(self, s):
        s = np.abs(np.asarray(s, dtype=np.float64))
        if self.kind == "gaussian":
            return np.exp(-(s**2))
        return ClassAKernel(self.delta, self.support).profile(s)

    def multiplier(self) -> Multiplier:
        def fn(kx, ky, kz):
            r = np.sqrt(kx * kx + ky * ky + kz * kz)
            return self.profile(self.eps * r)

        return Multiplier(fn, label=f"mollifier({self.kind},eps={self.eps})")

    def to_json(self) -> str:
        d = {"kind": self.kind, "eps": self.eps}
        if self.kind == "classA":
            d["delta"] = self.delta
            d["support"] = self.support
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MollifierMultiplier":
        d = json.loads(text)
        return cls(kind=d.get("kind", "gaussian"), eps=float(d.get("eps", 0.1)),
                   delta=float(d.get("delta", 0.25)), support=float(d.get("support", 1.0)))


@dataclass
class AdmissibilityReport:
    l1_total: float
    l1_tail: float
    tail_radius: float
    tail_threshold: float
    quadrature_gap: float
    indeterminate: bool
    passed: bool


def _radial_check_transform(profile, r_values, kmax, nodes=2048):
    """3-D inverse Fourier transform of a radial multiplier profile.

    check(x) = (2/|x|) * int_0^kmax profile(rho) rho sin(2 pi rho |x|) drho,
    with the profile negligible beyond kmax.
    """
    rho, w = np.polynomial.legendre.leggauss(nodes)
    rho = 0.5 * kmax * (rho + 1.0)
    w = 0.5 * kmax * w
    p = profile(rho)
    r = np.asarray(r_values, dtype=np.float64)
    sums = np.sum(w * p * rho * np.sin(2 * np.pi * rho * r[:, None]), axis=1)
    vals = 2.0 / np.where(r == 0, 1.0, r) * sums
    # r -> 0 limit: 4 pi int profile rho^2 drho
    zero_val = 4 * np.pi * np.sum(w * p * rho**2)
    return np.where(r == 0, zero_val, vals)


def schwartz_admissible(phi: MollifierMultiplier, lam_cut: float, gamma: float,
                        tail_exponent: float = 8.0) -> AdmissibilityReport:
    """Check the mollifier decay conditions at desk scale.

    Estimates the L1 norm of the inverse transform and the mass outside the
    ball of radius (lam_cut * gamma^-2)^-1; passes when the total is <= 1 and
    the tail is <= lam_cut^-tail_exponent.  Both L1 quantities are invariant
    under the eps-rescaling, so the quadrature runs in unit variables.
    Quadrature convergence is judged by doubling the resolution; disagreement
    is reported as indeterminate, never as a pass.
    """
    if lam_cut <= 1 or gamma <= 1:
        raise SpectralError("need lam_cut > 1 and gamma > 1")
    tail_radius = 1.0 / (lam_cut * gamma**-2)
    tail_threshold = lam_cut**-tail_exponent

    if phi.eps == 0.0:
        # Dirac convention: point mass at origin, zero mass outside any ball.
        return AdmissibilityReport(1.0, 0.0, tail_radius, tail_threshold, 0.0, False, True)

    # Unit-variable extents: the check transform of profile(eps |k|) is
    # eps^-3 * check_unit(x / eps), so L1 norms equal their unit versions and
    # the tail cut sits at u_tail = tail_radius / eps.
    if phi.kind == "gaussian":
        kmax_u, r_cap = 8.0, 6.0
    else:
        kmax_u, r_cap = phi.support, 600.0
    u_tail = tail_radius / phi.eps

    def run(n_r, n_nodes):
        r = np.linspace(0.0, r_cap, n_r)
        vals = _radial_check_transform(phi.profile, r, kmax_u, n_nodes)
        dens = 4 * np.pi * r**2 * np.abs(vals)
        total = float(np.trapezoid(dens, r))
        if u_tail >= r_cap:
            tail = 0.0
        else:
            mask = r >= u_tail
            tail = float(np.trapezoid(np.where(mask, dens, 0.0), r))
        # beyond-cap remainder bound from the outermost resolved density
        edge = float(np.mean(dens[-max(2, n_r // 100):]))
        remainder = edge * r_cap  # decay is at least 1/r_cap-paced for our kinds
        return total, tail, remainder

    total1, tail1, _ = run(4001, 2048)
    total2, tail2, remainder = run(8001, 4096)
    gap_total = abs(total1 - total2)
    gap_tail = abs(tail1 - tail2)
    gap = gap_total + gap_tail
    tail_est = tail2 + remainder
    certain_fail = (total2 - gap_total > 1.0 + 1e-6) or (tail2 - gap_tail > tail_threshold)
    converged = gap_total <= 1e-6 * (1.0 + total2) and gap_tail <= max(1e-9, 1e-3 * tail2)
    if certain_fail:
        indeterminate, passed = False, False
    elif converged and total2 <= 1.0 + 1e-6 and tail_est <= tail_threshold:
        indeterminate, passed = False, True
    else:
        indeterminate, passed = True, False
    return AdmissibilityReport(total2, tail_est, tail_radius, tail_threshold, gap,
                               indeterminate, passed)


def kernel_from_json(text: str):
    """Parse {'kind': 'classA'|'gaussian', ...} into a kernel object."""
    d = json.loads(text)
    kind = d.get("kind", "classA")
    if kind == "classA" and "eps" not in d:
        return ClassAKernel(float(d.get("delta", 0.25)), float(d.get("support", 1.0)))
    return MollifierMultiplier.from_json(text)


def default_shell_families() -> Sequence[ShellFamily]:
    """Two distinct class-A kernels for kernel-independence checks."""
    return (ShellFamily(ClassAKernel(0.25, 1.0)), ShellFamily(ClassAKernel(0.4, 0.9)))
