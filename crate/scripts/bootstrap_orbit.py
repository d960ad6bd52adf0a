#!/usr/bin/env python3
"""Generate seed orbit data for the Taylor-Green periodic-orbit pipeline.

Integrates the 2D vorticity equation pseudospectrally at a given viscosity,
detects the period of the attracting orbit, Fourier-transforms one period in
time, aligns the time origin with the quarter-period symmetry, and writes a
VFLD-1 seed file. The seed is *not* a library guarantee: it feeds
`nsorbit refine`, which Newton-polishes it on the reduced Galerkin system.

Usage:
    python3 scripts/bootstrap_orbit.py --nu 0.286 --box 8 --nt 6 \
        --out data/tg-orbit-nu0.286-seed.json
"""

import argparse
import json
import struct

import numpy as np


def hex64(x: float) -> str:
    return "0x{:016x}".format(struct.unpack("<Q", struct.pack("<d", float(x)))[0])


def integrate(nu: float, n_grid: int, t_end: float, dt: float):
    """Pseudospectral RK4 with an integrating factor for the viscous term."""
    k = np.fft.fftfreq(n_grid, 1.0 / n_grid)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    ksq = k1**2 + k2**2
    kinv = np.where(ksq > 0, 1.0 / np.where(ksq > 0, ksq, 1), 0.0)
    dealias = (np.abs(k1) <= n_grid // 3) & (np.abs(k2) <= n_grid // 3)
    x = np.arange(n_grid) * 2 * np.pi / n_grid
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    f_hat = np.fft.fft2(4.0 * np.sin(x1) * np.sin(x2))

    def nonlin(w_hat):
        psi = w_hat * kinv
        u1 = np.fft.ifft2(1j * k2 * psi).real
        u2 = np.fft.ifft2(-1j * k1 * psi).real
        wx = np.fft.ifft2(1j * k1 * w_hat).real
        wy = np.fft.ifft2(1j * k2 * w_hat).real
        return -np.fft.fft2(u1 * wx + u2 * wy) * dealias + f_hat

    w0 = (2.0 / nu) * np.sin(x1) * np.sin(x2)
    w0 += 0.05 * np.cos(x1) + 0.03 * np.sin(x2 + 0.7) + 0.02 * np.cos(2 * x1 + x2)
    w_hat = np.fft.fft2(w0)
    e_full = np.exp(-nu * ksq * dt)
    e_half = np.exp(-nu * ksq * dt / 2)
    steps = int(round(t_end / dt))
    for _ in range(steps):
        a = nonlin(w_hat)
        b = nonlin(e_half * (w_hat + 0.5 * dt * a))
        c = nonlin(e_half * w_hat + 0.5 * dt * b)
        d = nonlin(e_full * w_hat + dt * e_half * c)
        w_hat = e_full * w_hat + dt / 6.0 * (e_full * a + 2 * e_half * (b + c) + d)
    return w_hat, nonlin, (e_full, e_half), ksq


def detect_period(w_hat, step, nonlin, efs, dt, span, probe=(2, 1)):
    """March on, recording a probe coefficient; return (period, w_hat at a
    probe up-crossing, time offset of that crossing)."""
    e_full, e_half = efs
    times, sig, states = [], [], []
    n_steps = int(round(span / dt))
    for i in range(n_steps):
        a = nonlin(w_hat)
        b = nonlin(e_half * (w_hat + 0.5 * dt * a))
        c = nonlin(e_half * w_hat + 0.5 * dt * b)
        d = nonlin(e_full * w_hat + dt * e_half * c)
        w_hat = e_full * w_hat + dt / 6.0 * (e_full * a + 2 * e_half * (b + c) + d)
        times.append((i + 1) * dt)
        sig.append(w_hat[probe].real / w_hat.shape[0] ** 2)
        states.append(w_hat.copy() if i % 5 == 0 else None)
    sig = np.array(sig)
    mean = sig.mean()
    crossings = []
    for i in range(1, len(sig)):
        if sig[i - 1] < mean <= sig[i]:
            frac = (mean - sig[i - 1]) / (sig[i] - sig[i - 1])
            crossings.append(times[i - 1] + frac * dt)
    if len(crossings) < 4:
        raise SystemExit("no oscillation detected; increase the transient")
    periods = np.diff(crossings)
    period = periods[-3:].mean()
    return period, w_hat, crossings[-1] - times[-1]


def harvest(w_hat, nonlin, efs, dt, period, box, nt, n_grid, t_offset):
    """Integrate one more period, sampling the box coefficients, then DFT in
    time. `t_offset` shifts the sampling start to a signal crossing."""
    e_full, e_half = efs
    # the sampling start phase is arbitrary: the symmetry alignment below
    # absorbs it
    del t_offset
    n_lead = 0
    samples = 256
    dt_s = period / samples
    coeffs = np.zeros((samples, 2 * box + 1, 2 * box + 1), dtype=complex)

    def rk4(w_hat, h, e_f, e_h):
        a = nonlin(w_hat)
        b = nonlin(e_h * (w_hat + 0.5 * h * a))
        c = nonlin(e_h * w_hat + 0.5 * h * b)
        d = nonlin(e_f * w_hat + h * e_h * c)
        return e_f * w_hat + h / 6.0 * (e_f * a + 2 * e_h * (b + c) + d)

    for _ in range(n_lead):
        w_hat = rk4(w_hat, dt, e_full, e_half)
    # fixed-step sampling of one period
    nu_ksq = -np.log(np.where(e_full > 0, e_full, 1.0)) / dt  # = nu*ksq
    e_fs = np.exp(-nu_ksq * dt_s)
    e_hs = np.exp(-nu_ksq * dt_s / 2)
    scale = 1.0 / n_grid**2
    for s in range(samples):
        grid = np.fft.fftshift(w_hat) * scale
        c0 = n_grid // 2
        coeffs[s] = grid[c0 - box : c0 + box + 1, c0 - box : c0 + box + 1]
        w_hat = rk4(w_hat, dt_s, e_fs, e_hs)
    # temporal DFT: w_{n,n4} = (1/S) sum_s w_n(t_s) exp(-i n4 Omega t_s)
    out = {}
    for n4 in range(-nt, nt + 1):
        phase = np.exp(-1j * n4 * 2 * np.pi * np.arange(samples) / samples)
        c = (coeffs * phase[:, None, None]).mean(axis=0)
        for i1 in range(2 * box + 1):
            for i2 in range(2 * box + 1):
                n1, n2 = i1 - box, i2 - box
                if (n1, n2, n4) == (0, 0, 0):
                    continue
                v = c[i1, i2]
                if abs(v) > 1e-13:
                    out[(n1, n2, n4)] = v
    return out


def g3_defect(modes, box, nt, quarter_shift):
    """Defect of the quarter-period symmetry after shifting time by
    `quarter_shift` turns of the period: coefficients pick up
    exp(2 pi i n4 shift)."""
    total, count = 0.0, 0
    for (n1, n2, n4), v in modes.items():
        w = v * np.exp(2j * np.pi * n4 * quarter_shift)
        partner = modes.get((n2, n1, n4), 0.0) * np.exp(2j * np.pi * n4 * quarter_shift)
        alpha = -((-1.0) ** n2) * (1j**n4)
        total += abs(w - alpha * partner) ** 2
        count += 1
    return np.sqrt(total / max(count, 1))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nu", type=float, default=0.286)
    ap.add_argument("--box", type=int, default=8)
    ap.add_argument("--nt", type=int, default=6)
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--transient", type=float, default=320.0)
    ap.add_argument("--dt", type=float, default=0.004)
    ap.add_argument("--out", type=str, required=True)
    args = ap.parse_args()

    print(f"transient integration to t = {args.transient} ...")
    w_hat, nonlin, efs, _ = integrate(args.nu, args.grid, args.transient, args.dt)
    period, w_hat, t_offset = detect_period(
        w_hat, None, nonlin, efs, args.dt, span=40.0
    )
    omega = 2 * np.pi / period
    print(f"period T = {period:.8f}, Omega = {omega:.8f}")

    modes = harvest(
        w_hat, nonlin, efs, args.dt, period, args.box, args.nt, args.grid, t_offset
    )
    print(f"harvested {len(modes)} coefficients")

    # align the time origin with the quarter-period symmetry
    shifts = np.linspace(0, 1, 721, endpoint=False)
    defects = [g3_defect(modes, args.box, args.nt, s) for s in shifts]
    best = shifts[int(np.argmin(defects))]
    for _ in range(40):  # golden-ish refinement
        grid2 = best + np.linspace(-1, 1, 21) * (shifts[1] - shifts[0])
        d2 = [g3_defect(modes, args.box, args.nt, s) for s in grid2]
        best = grid2[int(np.argmin(d2))]
        shifts = grid2
    print(f"time-origin shift {best:.6f} turns, g3 defect {min(d2):.3e}")
    aligned = {
        k: v * np.exp(2j * np.pi * k[2] * best) for k, v in modes.items()
    }

    rows = []
    for (n1, n2, n4), v in sorted(aligned.items()):
        rows.append([n1, n2, 0, n4, 3, hex64(v.real), hex64(v.imag)])
    doc = {
        "version": "VFLD-1",
        "eta": hex64(1.0),
        "nu": hex64(args.nu),
        "omega_hex": hex64(omega),
        "box": {"nx1": args.box, "nx2": args.box, "nx3": 0, "nt": args.nt},
        "provenance": "bootstrap-time-integration",
        "modes": rows,
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=1)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
