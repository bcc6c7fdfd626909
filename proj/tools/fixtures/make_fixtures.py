#!/usr/bin/env python3
"""Regenerate the bundled monthly-series fixtures under tests/fixtures/series.

Each series is a reconstruction: monthly developer counts come from the
closed-form Bass increments for the reference (p, q, m); cumulative lines
come from integrating dA/dt = gamma * L^lambda * A^phi with scipy's adaptive
solver (independent of the C++ integrator), with gamma rescaled so that the
cumulative total at the last month matches the reference current growth.
Multiplicative noise is drawn from a fixed seed so the files are stable.
"""
import csv
import math
import pathlib
import zlib

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

OUT = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "series"

# name: (start YYYY-MM, p, q, m, lambda, phi, current growth in lines)
PROJECTS = {
    "dask-dask": ("2014-12", 0.00210, 0.03855, 2173.64627, -0.3811, 0.0111, 0.78e6),
    "huggingface-transformers": ("2018-10", 0.00230, 0.03078, 12940.35495, -0.4171, 0.5017, 5.25e6),
    "jupyterlab-jupyterlab": ("2015-07", 0.00358, 0.03007, 2820.22037, 1.4304, -0.2231, 4.15e6),
    "kubernetes-kubernetes": ("2014-06", 0.00464, 0.02233, 23872.21258, 12.9150, -1.1730, 46.41e6),
    "langchain-ai-langchain": ("2022-10", 0.01343, 0.14676, 5263.69827, 0.7093, 0.0916, 6.60e6),
    "microsoft-DeepSpeed": ("2020-01", 0.00197, 0.07003, 1496.74400, -0.6623, 0.3490, 0.62e6),
    "numpy-numpy": ("2001-12", 0.00018, 0.01735, 9769.60912, -0.3206, 0.3318, 5.91e6),
    "pandas-dev-pandas": ("2009-07", 0.00084, 0.02686, 9448.61510, 1.3005, -0.5523, 4.96e6),
    "pytorch-pytorch": ("2012-01", 0.00064, 0.02930, 34554.29690, 0.4524, 0.4228, 26.93e6),
    "vllm-project-vllm": ("2023-02", 0.00121, 0.11101, 12331.92116, 0.1723, 0.5940, 2.99e6),
}
END = "2026-01"
L_NOISE = 0.05
DA_NOISE = 0.25


def month_span(start, end):
    y0, m0 = map(int, start.split("-"))
    y1, m1 = map(int, end.split("-"))
    return (y1 - y0) * 12 + (m1 - m0) + 1


def month_label(start, k):
    y, m = map(int, start.split("-"))
    idx = y * 12 + (m - 1) + k
    return f"{idx // 12:04d}-{idx % 12 + 1:02d}"


def bass_F(p, q, t):
    e = np.exp(-(p + q) * t)
    return p * (1 - e) / (p + q * e)


def bass_f(p, q, t):
    e = math.exp(-(p + q) * t)
    return p * (p + q) ** 2 * e / (p + q * e) ** 2


def growth_path(p, q, m, gamma, lam, phi, months):
    """A(t) at t = 1..months with A(0) = 1, driven by L = m f(t)."""

    def rhs(t, y):
        L = max(m * bass_f(p, q, t), 1e-6)
        return [gamma * L ** lam * max(y[0], 1.0) ** phi]

    sol = solve_ivp(rhs, (0.0, months), [1.0], t_eval=np.arange(1, months + 1),
                    rtol=1e-10, atol=1e-6, method="LSODA")
    return sol.y[0]


def scaled_gamma(p, q, m, lam, phi, months, target):
    def gap(log_gamma):
        return math.log(growth_path(p, q, m, math.exp(log_gamma), lam, phi, months)[-1]) - math.log(target)

    return math.exp(brentq(gap, -200.0, 60.0, xtol=1e-10))


def write_series(name, start, L, dA):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["month", "developers", "lines_changed", "cum_lines", "cum_dev_months"])
        cum_a = cum_l = 0
        for k, (l, a) in enumerate(zip(L, dA)):
            cum_a += a
            cum_l += l
            w.writerow([month_label(start, k), l, a, cum_a, cum_l])


def project_rng(name):
    # Per-project stream so a fixture does not depend on which others are generated.
    return np.random.default_rng(zlib.crc32(name.encode()))


def main():
    for name, (start, p, q, m, lam, phi, growth) in PROJECTS.items():
        rng = project_rng(name)
        months = month_span(start, END)
        t = np.arange(1, months + 1)
        expected_L = m * (bass_F(p, q, t) - bass_F(p, q, t - 1))
        L = np.maximum(0, np.rint(expected_L * (1 + L_NOISE * rng.standard_normal(months)))).astype(int)
        gamma = scaled_gamma(p, q, m, lam, phi, months, growth)
        A = growth_path(p, q, m, gamma, lam, phi, months)
        inc = np.diff(np.concatenate([[1.0], A]))
        shock = np.exp(DA_NOISE * rng.standard_normal(months) - 0.5 * DA_NOISE ** 2)
        noisy = inc * shock
        dA = np.maximum(0, np.rint(noisy * (A[-1] - 1.0) / noisy.sum())).astype(int)
        write_series(name, start, L, dA)
        print(f"{name}: months={months} gamma={gamma:.6g} devmonths={L.sum()} A={dA.sum()}")

    rng = project_rng("jax-ml-jax")
    # Engagement still accelerating: the fitted quadratic has no positive root.
    # Each month solves L = b0 + b1 x + b2 x^2 with x = C + L / 2 for L.
    start, months = "2018-11", month_span("2018-11", END)
    b0, b1, b2 = 19.7, 0.01506, 4.26e-7
    cum, L = 0.0, []
    for _ in range(months):
        a2 = b2 / 4
        a1 = b1 / 2 + b2 * cum - 1
        a0 = b0 + b1 * cum + b2 * cum * cum
        level = (-a1 - math.sqrt(a1 * a1 - 4 * a2 * a0)) / (2 * a2)
        # Light noise: heavier noise masks the weak curvature.
        n = max(0, int(round(level * (1 + 0.01 * rng.standard_normal()))))
        L.append(n)
        cum += n
    dA = [int(round(600 * l * math.exp(DA_NOISE * rng.standard_normal()))) for l in L]
    write_series("jax-ml-jax", start, L, dA)
    print(f"jax-ml-jax: months={months} devmonths={sum(L)}")


if __name__ == "__main__":
    main()
