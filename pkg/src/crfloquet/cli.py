"""Command-line interface.

Subcommands: build-model, analyze, scan, resonance, compare.
Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 partial scan
failure.  All outputs are deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import units
from .atom_model import (
    AtomModel,
    GridSpec,
    LaserField,
    build_softcore_model,
    bundled_model,
    intensity_to_field,
    load_atom_model,
    save_atom_model,
)
from .dynamics import (
    cr_envelopes,
    cycle_averaged_amplitudes,
    damping_ratio,
    dressed_diagonalize,
    m_max,
    population_series,
    write_series_csv,
    PopulationSeries,
)
from .errors import CRFloquetError, OffResonanceError, ScanPartialFailure
from .scan import (
    ParamGrid,
    dressed_resonance,
    effective_point,
    regime_map,
    resonance_ridge,
    resonance_width,
    scan_heff,
    write_resonance_csv,
    write_ridge_csv,
    write_surface_csv,
)
from .tdse import PropagatorConfig, modulation_depth, propagate


def _complex_json(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _load_model(args) -> AtomModel:
    if getattr(args, "preset", None):
        return bundled_model(args.preset)
    if args.model is None:
        raise CRFloquetError("no model given: use --model PATH or --preset NAME")
    try:
        return load_atom_model(args.model)
    except OSError as exc:
        raise CRFloquetError(f"cannot read model file: {exc}") from None


def _resolve_omega(args) -> float:
    if args.omega_au is not None:
        return args.omega_au
    if args.omega_ev is not None:
        return units.ev_to_au(args.omega_ev)
    raise CRFloquetError("need --omega-au or --omega-ev")


def _resolve_e0(args) -> float:
    if args.e0_au is not None:
        return args.e0_au
    if args.intensity is not None:
        return intensity_to_field(args.intensity)
    raise CRFloquetError("need --intensity or --e0-au")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _maybe_json_series(path_csv: Path, fmt: str) -> None:
    """Mirror a CSV file as JSON records when --format json is selected."""
    if fmt != "json":
        return
    import csv as _csv

    with open(path_csv, newline="", encoding="utf-8") as fh:
        rows = list(_csv.reader(fh))
    header, body = rows[0], rows[1:]
    records = [dict(zip(header, row)) for row in body]
    _write_json(path_csv.with_suffix(".json"), {"rows": records})


# ---------------------------------------------------------------------------
# build-model
# ---------------------------------------------------------------------------


def _cmd_build_model(args) -> int:
    if args.preset is None and not args.softcore:
        raise CRFloquetError("choose --preset NAME or --softcore")
    if args.preset is not None:
        model = bundled_model(args.preset)
    else:
        grid = GridSpec(
            extent=args.extent,
            points=args.points,
            softening=args.softening,
            cap_start=args.cap_start if args.cap_start is not None else 0.75 * args.extent,
            cap_strength=args.cap_strength,
        )
        model = build_softcore_model(grid, n_keep=args.n_keep)
    save_atom_model(model, args.output)
    print(f"wrote {args.output} ({model.n_levels} levels)")
    return 0


# ---------------------------------------------------------------------------
# analyze / compare
# ---------------------------------------------------------------------------


def _analysis_series(atom, args):
    """Run the effective and time-domain sides at one field point."""
    omega = _resolve_omega(args)
    e0 = _resolve_e0(args)
    cycle = 2.0 * math.pi / omega

    if args.envelope == "gaussian":
        if args.fwhm_fs is None:
            raise CRFloquetError("gaussian envelope requires --fwhm-fs")
        fwhm = units.fs_to_au(args.fwhm_fs)
        field = LaserField(omega, e0, "gaussian", fwhm=fwhm)
        t_max = args.t_max_au if args.t_max_au else 2.0 * fwhm
    else:
        field = LaserField(omega, e0)
        t_max = args.t_max_au if args.t_max_au else args.cycles * cycle

    config = PropagatorConfig(
        t_max=t_max,
        steps_per_cycle_min=args.steps_per_cycle,
        record_stride=args.record_stride,
    )
    pt = effective_point(
        atom, omega, e0=e0, ground=args.ground, excited=args.excited,
        photon_order=args.photon_order,
    )
    g_idx = pt.partition.ground.level
    x_idx = pt.partition.excited.level
    tdse = propagate(atom, field, config, initial_level=g_idx, excited_level=x_idx)

    dressed = dressed_diagonalize(pt.heff1)
    if field.envelope == "rect":
        analytic = population_series(
            dressed, pt.cr, pt.bundle.chi, pt.partition, omega, tdse.times, source="effective"
        )
    else:
        analytic = _adiabatic_series(atom, args, pt, omega, e0, tdse.times)
    return pt, dressed, field, tdse, analytic, t_max


def _adiabatic_series(atom, args, pt, omega, e0, times) -> PopulationSeries:
    """Effective-side Gaussian-pulse estimate under the slowly-varying
    envelope approximation.

    The two essential amplitudes are stepped with the instantaneous
    complex-symmetric effective Hamiltonian (its c-orthonormal frame chains
    consistently across intensities) and mapped back through the instantaneous
    (P + C)^{1/2} metric, so that mid-pulse amplitudes carry the correct
    Q-space normalization transfer.  Flagged as an approximation in the
    metadata.
    """
    from scipy.interpolate import make_interp_spline

    from .effham import _sqrtm_2x2, heff1_complex_symmetric as _cs

    i_peak = e0**2 * units.INTENSITY_AU
    nodes = np.linspace(0.0, i_peak, 12)
    hcs = np.empty((nodes.size, 2, 2), dtype=complex)
    cmat = np.empty((nodes.size, 2, 2), dtype=complex)
    lam0 = np.empty(nodes.size, dtype=complex)
    lam4 = np.empty(nodes.size, dtype=complex)
    for k, inten in enumerate(nodes):
        ptk = effective_point(
            atom, omega, intensity_wcm2=inten, ground=args.ground, excited=args.excited,
            photon_order=args.photon_order,
        )
        hcs[k] = _cs(ptk.heff1, ptk.bundle.corr)
        cmat[k] = ptk.bundle.corr.matrix
        lam0[k] = ptk.cr.lambda_0
        lam4[k] = ptk.cr.lambda_m4
    spl_h = make_interp_spline(nodes, hcs.reshape(nodes.size, 4), k=3)
    spl_c = make_interp_spline(nodes, cmat.reshape(nodes.size, 4), k=3)
    spl_l0 = make_interp_spline(nodes, lam0, k=3)
    spl_l4 = make_interp_spline(nodes, lam4, k=3)

    fwhm = units.fs_to_au(args.fwhm_fs)
    alpha = math.log(2.0) * (2.0 / fwhm) ** 2

    def intensity_at(t):
        return np.minimum(i_peak * np.exp(-alpha * np.asarray(t) ** 2), i_peak)

    def essential_frame(psi_cs, inten):
        root = _sqrtm_2x2(np.eye(2) + np.asarray(spl_c(inten)).reshape(2, 2))
        return np.linalg.solve(root, psi_cs)

    t0, t1 = times[0], times[-1]
    dt = (2.0 * math.pi / omega) / 8.0
    n_steps = int(math.ceil((t1 - t0) / dt))
    dt = (t1 - t0) / n_steps
    psi = np.array([1.0, 0.0], dtype=complex)
    ts = np.empty(n_steps + 1)
    amps = np.empty((n_steps + 1, 2), dtype=complex)
    ts[0] = t0
    amps[0] = essential_frame(psi, float(intensity_at(t0)))
    for s in range(n_steps):
        t_mid = t0 + (s + 0.5) * dt
        h = np.asarray(spl_h(float(intensity_at(t_mid)))).reshape(2, 2)
        w, v = np.linalg.eig(h)
        psi = v @ (np.exp(-1j * w * dt) * np.linalg.solve(v, psi))
        ts[s + 1] = t0 + (s + 1) * dt
        amps[s + 1] = essential_frame(psi, float(intensity_at(ts[s + 1])))

    a = np.interp(times, ts, amps[:, 0].real) + 1j * np.interp(times, ts, amps[:, 0].imag)
    b = np.interp(times, ts, amps[:, 1].real) + 1j * np.interp(times, ts, amps[:, 1].imag)
    i_t = intensity_at(times)
    l0 = spl_l0(i_t)
    l4 = spl_l4(i_t)
    pb = np.abs(b) ** 2
    # full squared beat: non-negative even for giant CR amplitudes
    beat = np.abs(1.0 + l0 * np.exp(2j * omega * times) + l4 * np.exp(-2j * omega * times)) ** 2
    phases = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False))
    beat_grid = np.abs(1.0 + l0[:, None] * phases[None, :] + l4[:, None] / phases[None, :]) ** 2
    return PopulationSeries(
        times=np.asarray(times, dtype=float),
        pop_ground=np.abs(a) ** 2,
        pop_excited=pb * beat,
        norm=np.abs(a) ** 2 + pb,
        envelope_lo=pb * beat_grid.min(axis=1),
        envelope_hi=pb * beat_grid.max(axis=1),
        meta={"source": "adiabatic", "omega": omega, "approximation": "slowly-varying envelope"},
    )


def _summary_payload(pt, dressed, field, t_max, seed=None) -> dict:
    from .errors import ModelFormatError as _MFE

    try:
        zeta = damping_ratio(pt.heff1)
        resonant = True
    except OffResonanceError:
        zeta = damping_ratio(pt.heff1, require_resonance=False)
        resonant = False
    except _MFE:
        zeta = None  # no coupling at all (zero field)
        resonant = False
    # span over at least a few Rabi periods, not just the plotted window
    split = abs(dressed.lambda_plus - dressed.lambda_minus)
    t_span = max(t_max, 8.0 * math.pi / max(split, 1e-12))
    span = m_max(pt.cr, dressed, min(t_span, 1e9))
    payload = {
        "omega_au": pt.omega,
        "omega_ev": units.au_to_ev(pt.omega),
        "intensity_wcm2": pt.intensity_wcm2,
        "e0_au": pt.e0,
        "envelope": field.envelope,
        "lambda_plus": _complex_json(dressed.lambda_plus),
        "lambda_minus": _complex_json(dressed.lambda_minus),
        "cr_lambda_0": _complex_json(pt.cr.lambda_0),
        "cr_lambda_m4": _complex_json(pt.cr.lambda_m4),
        "cr_lambda_sum": _complex_json(pt.cr.lambda_sum),
        "m_max": span,
        "zeta": zeta,
        "resonant": resonant,
        "chi_ground_norm": pt.bundle.diagnostics["chi_ground_norm"],
        "cond_p_plus_c": pt.bundle.diagnostics["cond_pc"],
    }
    if seed is not None:
        payload["seed"] = seed
    return payload


def _cmd_analyze(args) -> int:
    atom = _load_model(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pt, dressed, field, tdse, analytic, t_max = _analysis_series(atom, args)

    csv_path = out_dir / "populations.csv"
    write_series_csv(csv_path, [analytic, tdse])
    _maybe_json_series(csv_path, args.format)
    _write_json(out_dir / "summary.json", _summary_payload(pt, dressed, field, t_max, args.seed))

    from .effham import effective_hamiltonian_to_dict

    labels = (atom.levels[pt.partition.ground.level].label,
              atom.levels[pt.partition.excited.level].label)
    _write_json(out_dir / "heff.json", effective_hamiltonian_to_dict(pt.heff1, labels))
    if args.dump_floquet:
        from .floquet import write_matrix_triplets

        write_matrix_triplets(out_dir / "floquet_matrix.txt", pt.fm)

    if args.svg:
        from .svgplot import line_plot

        curves = {
            "tdse excited": tdse.pop_excited,
            "effective excited": analytic.pop_excited,
        }
        if analytic.envelope_lo is not None:
            curves["envelope lo"] = analytic.envelope_lo
            curves["envelope hi"] = analytic.envelope_hi
        line_plot(
            out_dir / "populations.svg", tdse.times, curves,
            title="excited-state population", xlabel="t (a.u.)", ylabel="population",
        )
    print(f"wrote {csv_path} and summary.json")
    return 0


def _cmd_compare(args) -> int:
    atom = _load_model(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pt, dressed, field, tdse, analytic, t_max = _analysis_series(atom, args)
    if field.envelope != "rect":
        raise CRFloquetError("compare works on rectangular pulses")

    omega = pt.omega
    cycle = 2.0 * math.pi / omega
    depth = modulation_depth(tdse, "excited", omega=omega)
    dev = float(np.max(np.abs(analytic.pop_excited - tdse.pop_excited)))
    lo, hi = cr_envelopes(dressed, pt.cr, tdse.times)
    slack = 4.0 * abs(pt.cr.lambda_0) * abs(pt.cr.lambda_m4) * float(
        np.max(np.abs(cycle_averaged_amplitudes(dressed, tdse.times)[1]) ** 2)
    )
    violation = float(
        max(np.max(tdse.pop_excited - hi, initial=0.0), np.max(lo - tdse.pop_excited, initial=0.0))
    )
    span_eq6 = m_max(pt.cr, dressed, t_max)
    payload = {
        "omega_au": omega,
        "intensity_wcm2": pt.intensity_wcm2,
        "cycles": t_max / cycle,
        "max_pointwise_deviation": dev,
        "tdse_modulation_depth": depth,
        "deviation_over_modulation": dev / depth if depth > 0 else float("inf"),
        "m_max_analytic": span_eq6,
        "m_max_relative_difference": abs(span_eq6 - depth) / span_eq6 if span_eq6 > 0 else float("inf"),
        "envelope_violation": violation,
        "interference_slack": slack,
    }
    _write_json(out_dir / "compare.json", payload)
    print(json.dumps(payload, indent=1, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# scan / resonance
# ---------------------------------------------------------------------------


def _grid_from_args(args) -> ParamGrid:
    if args.omega_min_au is None or args.omega_max_au is None:
        raise CRFloquetError("need --omega-min-au and --omega-max-au")
    omegas = np.linspace(args.omega_min_au, args.omega_max_au, args.omega_points)
    if args.log_intensity:
        intens = np.geomspace(args.intensity_min, args.intensity_max, args.intensity_points)
    else:
        intens = np.linspace(args.intensity_min, args.intensity_max, args.intensity_points)
    return ParamGrid(omegas, intens)


def _cmd_scan(args) -> int:
    atom = _load_model(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = _grid_from_args(args)
    hgrid = scan_heff(
        atom, grid, ground=args.ground, excited=args.excited,
        photon_order=args.photon_order, workers=args.workers,
    )
    surfaces = regime_map(hgrid)
    write_surface_csv(out_dir / "surfaces.csv", surfaces)
    _maybe_json_series(out_dir / "surfaces.csv", args.format)

    if hgrid.all_ok and grid.omegas.size >= 4 and grid.intensities.size >= 4 and args.ridge:
        rows = resonance_ridge(hgrid)
        write_ridge_csv(out_dir / "ridge.csv", rows)

    if args.svg:
        from .svgplot import heatmap

        heatmap(
            out_dir / "max_pop.svg", grid.omegas, grid.intensities, surfaces.max_pop_excited,
            title="peak excited population", xlabel="omega (a.u.)", ylabel="intensity (W/cm^2)",
        )
        heatmap(
            out_dir / "zeta.svg", grid.omegas, grid.intensities, surfaces.zeta,
            title="damping ratio", xlabel="omega (a.u.)", ylabel="intensity (W/cm^2)",
        )

    if not hgrid.all_ok:
        report = [{"i": i, "j": j, "error": msg} for i, j, msg in hgrid.failures]
        _write_json(out_dir / "scan_failures.json", {"failures": report})
        print(f"scan finished with {len(report)} failed nodes", file=sys.stderr)
        return 4
    print(f"wrote {out_dir / 'surfaces.csv'}")
    return 0


def _cmd_resonance(args) -> int:
    atom = _load_model(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = _grid_from_args(args)
    hgrid = scan_heff(
        atom, grid, ground=args.ground, excited=args.excited,
        photon_order=args.photon_order, workers=args.workers,
    )
    if not hgrid.all_ok:
        report = [{"i": i, "j": j, "error": msg} for i, j, msg in hgrid.failures]
        _write_json(out_dir / "scan_failures.json", {"failures": report})
        return 4
    rows = []
    for intensity in grid.intensities:
        om = dressed_resonance(hgrid, intensity)
        rows.append((float(intensity), om, resonance_width(hgrid, intensity, om)))
    write_resonance_csv(out_dir / "resonance.csv", rows)
    _maybe_json_series(out_dir / "resonance.csv", args.format)
    if args.svg:
        from .svgplot import line_plot

        line_plot(
            out_dir / "resonance.svg",
            [r[0] for r in rows],
            {"omega_max (a.u.)": [r[1] for r in rows]},
            title="dressed resonance", xlabel="intensity (W/cm^2)", ylabel="omega_max (a.u.)",
        )
    print(f"wrote {out_dir / 'resonance.csv'}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_model_flags(p):
    p.add_argument("--model", help="atom model JSON file")
    p.add_argument("--preset", help="bundled model name (two_level, ladder5)")
    p.add_argument("--ground", default=None, help="ground level label or index")
    p.add_argument("--excited", default=None, help="excited level label or index")
    p.add_argument("--photon-order", type=int, default=2, help="photon order of the transition")


def _add_field_flags(p):
    p.add_argument("--omega-au", type=float, help="photon energy (a.u.)")
    p.add_argument("--omega-ev", type=float, help="photon energy (eV)")
    p.add_argument("--intensity", type=float, help="peak intensity (W/cm^2)")
    p.add_argument("--e0-au", type=float, help="peak field amplitude (a.u.)")
    p.add_argument("--envelope", choices=("rect", "gaussian"), default="rect")
    p.add_argument("--fwhm-fs", type=float, help="gaussian intensity FWHM (fs)")
    p.add_argument("--cycles", type=float, default=50.0, help="rect pulse length (optical cycles)")
    p.add_argument("--t-max-au", type=float, help="override propagation end time (a.u.)")
    p.add_argument("--steps-per-cycle", type=int, default=400)
    p.add_argument("--record-stride", type=int, default=1)
    p.add_argument("--dump-floquet", action="store_true",
                   help="dump the assembled matrix as (row, col, re, im) triplets")


def _add_common_flags(p):
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--svg", action="store_true", help="emit decorative SVG plots")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="recorded in summaries")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crfloquet",
        description="Counter-rotating Rabi dynamics of lossy few-level atoms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-model", help="emit an atom-model JSON file")
    p.add_argument("--preset", help="bundled model name (two_level, ladder5)")
    p.add_argument("--softcore", action="store_true", help="build from the 1D soft-core grid")
    p.add_argument("--extent", type=float, default=400.0)
    p.add_argument("--points", type=int, default=2048)
    p.add_argument("--softening", type=float, default=2.0)
    p.add_argument("--cap-start", type=float, default=None)
    p.add_argument("--cap-strength", type=float, default=0.005)
    p.add_argument("--n-keep", type=int, default=24)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_build_model)

    p = sub.add_parser("analyze", help="single-point populations and summary")
    _add_model_flags(p)
    _add_field_flags(p)
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("compare", help="effective-vs-time-domain deviation metrics")
    _add_model_flags(p)
    _add_field_flags(p)
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_compare)

    for name, handler in (("scan", _cmd_scan), ("resonance", _cmd_resonance)):
        p = sub.add_parser(name, help=f"{name} over an (omega, intensity) grid")
        _add_model_flags(p)
        p.add_argument("--omega-min-au", type=float)
        p.add_argument("--omega-max-au", type=float)
        p.add_argument("--omega-points", type=int, default=10)
        p.add_argument("--intensity-min", type=float, required=True)
        p.add_argument("--intensity-max", type=float, required=True)
        p.add_argument("--intensity-points", type=int, default=10)
        p.add_argument("--log-intensity", action="store_true")
        p.add_argument("--ridge", action="store_true", help="emit the resonance-ridge table")
        _add_common_flags(p)
        p.set_defaults(handler=handler)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ScanPartialFailure as exc:
        print(f"partial scan failure: {exc}", file=sys.stderr)
        return 4
    except CRFloquetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
