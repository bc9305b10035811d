"""Command-line interface.

Exit codes: 0 success, 2 input/validation error, 3 symmetry/consistency
failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .elasticity import COMPONENT_NAMES, DefectFrame, StrainTensor, StressTensor
from .exceptions import SpinStressError, SymmetryError, ValidationError
from .presets import list_presets, load_material, load_scenarios
from .regression import default_strain_battery, dump_dataset, fit, generate_synthetic, load_dataset
from .sensitivity import BETA_CONVENTIONS, DEFAULT_BETA_CONVENTION, ReadoutScenario, eta
from .spin import CHANNELS, build_hamiltonian, strain_hamiltonian_coefficients, transition_shifts

FORMATS = ("text", "json", "csv")

_COEFFICIENT_MAP = """\
channel coefficients (MHz), for strain (h, eps) or stress (g, sigma) alike:
  c_z  [Sz^2]         = h41 (xx + yy) + h43 zz
  c_xz [{Sx,Sz}]      = 1/2 [h26 zx - 1/2 h25 (xx - yy)]
  c_yz [{Sy,Sz}]      = 1/2 (h26 yz + h25 xy)
  c_d  [Sy^2 - Sx^2]  = 1/2 [h16 zx - 1/2 h15 (xx - yy)]
  c_xy [{Sx,Sy}]      = 1/2 (h16 yz + h15 xy)"""


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _parse_axis(text):
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ValidationError(f"cannot parse axis {text!r}; expected three comma-separated numbers") from None
    if v.shape != (3,):
        raise ValidationError(f"axis {text!r} must have three components")
    return v


def _material(args):
    if args.config:
        return load_material(args.config)
    if args.preset:
        return load_material(args.preset)
    raise ValidationError("give --preset NAME or --config FILE")


def _frame(args, material):
    if args.z_axis is None and args.x_axis is None:
        return material.frame
    z = _parse_axis(args.z_axis) if args.z_axis else material.frame.z_axis
    x = _parse_axis(args.x_axis) if args.x_axis else material.frame.x_axis
    return DefectFrame.from_axes(z, x)


def _log(args, text):
    if args.verbose:
        print(text, file=sys.stderr)


# -- convert ----------------------------------------------------------------


def _report_dict(report, frame):
    return {
        "source": report.source.as_dict(),
        "source_unit": report.source.unit,
        "target": report.target.as_dict(),
        "target_unit": report.target.unit,
        "linear_map": report.linear_map.tolist(),
        "linear_map_unit": "GPa^-1" if report.target.kind == "stress" else "GPa",
        "residual": report.residual,
        "frame": {"x": frame.x_axis.tolist(), "y": frame.y_axis.tolist(), "z": frame.z_axis.tolist()},
    }


def _format_report(report, frame, fmt):
    src, tgt = report.source, report.target
    if fmt == "json":
        return _dump_json(_report_dict(report, frame))
    if fmt == "csv":
        header = [
            "parameter",
            f"{src.prefix}_{src.unit.replace('/', '_per_')}",
            f"{src.prefix}_err_{src.unit.replace('/', '_per_')}",
            f"{tgt.prefix}_{tgt.unit.replace('/', '_per_')}",
            f"{tgt.prefix}_err_{tgt.unit.replace('/', '_per_')}",
        ]
        rows = [
            [p[1:], f"{a:.10g}", f"{ea:.10g}", f"{b:.10g}", f"{eb:.10g}"]
            for p, a, ea, b, eb in zip(src.names, src.values, src.errors, tgt.values, tgt.errors)
        ]
        return _csv_text(header, rows)
    lines = [f"frame: x={np.round(frame.x_axis, 6).tolist()} z={np.round(frame.z_axis, 6).tolist()}"]
    lines.append(f"{'param':<6} {src.prefix + ' (' + src.unit + ')':>24} {tgt.prefix + ' (' + tgt.unit + ')':>24}")
    for sn, a, ea, tn, b, eb in zip(src.names, src.values, src.errors, tgt.names, tgt.values, tgt.errors):
        lines.append(f"{sn + '/' + tn:<6} {f'{a:.6g} ± {ea:.2g}':>24} {f'{b:.6g} ± {eb:.2g}':>24}")
    unit = "GPa^-1" if tgt.kind == "stress" else "GPa"
    lines.append(f"linear map ({src.prefix} -> {tgt.prefix}, {unit}):")
    for row in report.linear_map:
        lines.append("  " + " ".join(f"{v:12.5e}" for v in row))
    lines.append(f"symmetry residual (dimensionless): {report.residual:.3e}")
    return "\n".join(lines)


def cmd_convert(args):
    material = _material(args)
    frame = _frame(args, material)
    _log(args, _COEFFICIENT_MAP)
    if args.verbose and args.z_axis is None and args.x_axis is None:
        for name, value, ref, tol, ok in material.self_check():
            _log(args, f"self-check {name}: {value:.4g} vs {ref:.4g} ± {tol:.3g} MHz/GPa {'ok' if ok else 'MISMATCH'}")
    try:
        if args.direction == "strain-to-stress":
            report = material.convert(frame)
        else:
            report = material.convert_back(frame)
    except SymmetryError as exc:
        if exc.report is not None:
            print(_format_report(exc.report, frame, args.format))
        raise
    print(_format_report(report, frame, args.format))
    return 0


# -- generate / fit ---------------------------------------------------------


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse number list {text!r}") from None


def cmd_generate(args):
    material = _material(args)
    if material.strain_couplings is None:
        raise ValidationError(f"preset {material.name!r} has no strain couplings")
    directions = [d.strip() for d in args.directions.split(",") if d.strip()]
    battery = default_strain_battery(_float_list(args.magnitudes), directions)
    baseline = np.zeros((3, 3))
    if args.base_splitting is not None:
        baseline[2, 2] = args.base_splitting
    samples = generate_synthetic(material.strain_couplings, battery, args.noise, args.seed, baseline)
    records = dump_dataset(samples, baseline)
    if args.format == "csv":
        header = ["label"] + [f"e{c}" for c in COMPONENT_NAMES] + [f"D{i}{j}_MHz" for i in "xyz" for j in "xyz"]
        rows = [
            [r.get("label", "")] + [repr(r["strain"]["e" + c]) for c in COMPONENT_NAMES] + [repr(v) for v in r["d_matrix"]]
            for r in records
        ]
        text = _csv_text(header, rows)
    else:
        text = json.dumps(records, indent=None if args.format == "json" else 1)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _log(args, f"wrote {len(records)} records to {args.output}")
    else:
        print(text)
    return 0


def cmd_fit(args):
    samples, baseline = load_dataset(args.dataset)
    result = fit(samples, baseline)
    if args.format == "json":
        print(_dump_json(result.as_dict()))
    elif args.format == "csv":
        h = result.h
        print(_csv_text(["parameter", "h_MHz_per_strain", "stderr_MHz_per_strain"],
                        [[n, f"{v:.12g}", f"{e:.6g}"] for n, v, e in zip(h.names, h.values, h.errors)]))
    else:
        lines = [f"samples: {result.sample_count}", f"{'param':<6} {'h (MHz/strain)':>22}"]
        for n, v, e in zip(result.h.names, result.h.values, result.h.errors):
            lines.append(f"{n:<6} {f'{v:.8g} ± {e:.3g}':>22}")
        lines.append("residual RMS per channel (MHz): " + ", ".join(
            f"{c}={r:.3g}" for c, r in zip(CHANNELS, result.residual_rms)))
        lines.append(f"normal-matrix condition number (dimensionless): {result.condition_number:.4g}")
        print("\n".join(lines))
    return 0


# -- hamiltonian ------------------------------------------------------------


def _components(pairs, prefix):
    values = dict.fromkeys(COMPONENT_NAMES, 0.0)
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or not key.startswith(prefix) or key[1:] not in values:
            raise ValidationError(
                f"bad component {pair!r}; expected {prefix}xx, {prefix}yy, {prefix}zz, "
                f"{prefix}yz, {prefix}zx or {prefix}xy followed by =value"
            )
        try:
            values[key[1:]] = float(value)
        except ValueError:
            raise ValidationError(f"bad number in {pair!r}") from None
    return values


def cmd_hamiltonian(args):
    material = _material(args)
    if args.strain and args.stress:
        raise ValidationError("give either --strain or --stress, not both")
    _log(args, _COEFFICIENT_MAP)
    if args.stress:
        couplings = material.convert().target
        tensor = StressTensor.from_components(**_components(args.stress, "s"))
    else:
        if material.strain_couplings is None:
            raise ValidationError(f"preset {material.name!r} has no strain couplings")
        couplings = material.strain_couplings
        tensor = StrainTensor.from_components(**_components(args.strain, "e"))
    coefficients = strain_hamiltonian_coefficients(couplings, tensor)
    h = build_hamiltonian(coefficients)
    energies = np.linalg.eigvalsh(h)
    shifts = None
    if args.base_splitting is not None:
        shifts = transition_shifts(args.base_splitting, coefficients)
    if args.format == "json":
        out = {
            "channels_MHz": coefficients.as_dict(),
            "hamiltonian_MHz": {"real": h.real.tolist(), "imag": h.imag.tolist()},
            "eigenvalues_MHz": energies.tolist(),
            "basis": ["+1", "0", "-1"],
        }
        if shifts is not None:
            out["transitions_MHz"] = {"f_plus": shifts[0], "f_minus": shifts[1], "base_splitting": args.base_splitting}
        print(_dump_json(out))
    elif args.format == "csv":
        rows = [[c, f"{v:.12g}"] for c, v in coefficients.as_dict().items()]
        if shifts is not None:
            rows += [["f_plus", f"{shifts[0]:.12g}"], ["f_minus", f"{shifts[1]:.12g}"]]
        print(_csv_text(["quantity", "value_MHz"], rows))
    else:
        lines = ["channel coefficients (MHz):"]
        lines += [f"  {c:<5} {v: .6g}" for c, v in coefficients.as_dict().items()]
        lines.append("H/h (MHz), basis |+1>, |0>, |-1>:")
        for row in h:
            lines.append("  " + "  ".join(f"{v.real: .5g}{v.imag:+.5g}j" for v in row))
        lines.append("eigenvalues (MHz): " + ", ".join(f"{e:.6g}" for e in energies))
        if shifts is not None:
            lines.append(f"transitions (MHz): f+ = {shifts[0]:.6f}, f- = {shifts[1]:.6f}")
        print("\n".join(lines))
    return 0


# -- sensitivity ------------------------------------------------------------

_SENSITIVITY_HEADER = ["label", "g_MHz_per_GPa", "contrast", "beta", "beta_convention", "T2_s", "eta", "inverse_eta"]


def cmd_sensitivity(args):
    single = [args.coupling, args.contrast, args.count_rate, args.t2]
    if any(v is not None for v in single):
        if any(v is None for v in single):
            raise ValidationError("a single scenario needs --coupling, --contrast, --count-rate and --t2")
        scenarios = [
            ReadoutScenario(
                contrast=args.contrast,
                count_rate=args.count_rate,
                readout_duration=args.readout,
                t2=args.t2,
                coupling=args.coupling,
                label=args.label,
            )
        ]
    else:
        scenarios = load_scenarios(args.config or args.preset)
    results = [(s, eta(s, args.beta_convention)) for s in scenarios]
    _log(args, f"beta convention: {results[0][1].assumptions}")
    rows = []
    for s, r in results:
        rows.append(
            {
                "label": s.label,
                "g_MHz_per_GPa": s.coupling,
                "contrast": s.contrast,
                "beta": r.beta_used,
                "beta_convention": r.beta_convention,
                "T2_s": s.t2,
                "eta": "insensitive" if r.insensitive else r.eta,
                "inverse_eta": r.inverse_eta,
            }
        )
    if args.format == "json":
        print(_dump_json({"units": {"eta": "GPa/sqrt(Hz)", "inverse_eta": "sqrt(Hz)/GPa"}, "rows": rows}))
    elif args.format == "csv":
        def fmt(v):
            return f"{v:.10g}" if isinstance(v, float) else str(v)

        print(_csv_text(_SENSITIVITY_HEADER, [[fmt(row[k]) for k in _SENSITIVITY_HEADER] for row in rows]))
    else:
        lines = [f"{'label':<22} {'g (MHz/GPa)':>12} {'C':>6} {'T2 (ms)':>8} {'eta (GPa/sqrt(Hz))':>20} {'1/eta (sqrt(Hz)/GPa)':>21}"]
        for row in rows:
            e = row["eta"] if isinstance(row["eta"], str) else f"{row['eta']:.4e}"
            lines.append(
                f"{row['label']:<22} {row['g_MHz_per_GPa']:>12.4g} {row['contrast']:>6.3g} "
                f"{row['T2_s'] * 1e3:>8.3g} {e:>20} {row['inverse_eta']:>21.5g}"
            )
        lines.append(f"beta: {results[0][1].assumptions}")
        print("\n".join(lines))
    return 0


# -- presets ----------------------------------------------------------------


def cmd_presets(args):
    presets = list_presets()
    if args.format == "json":
        print(_dump_json({n: {"kind": k, "description": d, "path": str(p)} for n, (k, d, p) in presets.items()}))
    elif args.format == "csv":
        print(_csv_text(["name", "kind", "description"], [[n, k, d] for n, (k, d, _) in presets.items()]))
    else:
        print("\n".join(f"{n:<24} {k:<10} {d}" for n, (k, d, _) in presets.items()))
    return 0


# -- parser -----------------------------------------------------------------


def _add_material(p):
    p.add_argument("--preset", help="material preset name")
    p.add_argument("--config", help="material preset TOML file")


def _add_format(p, default="text"):
    p.add_argument("--format", choices=FORMATS, default=default)


def build_parser():
    parser = argparse.ArgumentParser(prog="spinstress", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="print coefficient map, beta convention, self-checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert strain couplings to stress couplings or back")
    _add_material(p)
    p.add_argument("--direction", choices=("strain-to-stress", "stress-to-strain"), default="strain-to-stress")
    p.add_argument("--z-axis", help="override defect z axis, crystal coordinates 'a,b,c'")
    p.add_argument("--x-axis", help="override defect x axis, crystal coordinates 'a,b,c'")
    _add_format(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("generate", help="write a synthetic (strain, D matrix) dataset")
    _add_material(p)
    p.add_argument("--noise", type=float, default=0.0, help="channel noise RMS, MHz")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--magnitudes", default="0.001,0.002", help="strain magnitudes (tensor components)")
    p.add_argument("--directions", default=",".join(COMPONENT_NAMES), help="strain components to deform")
    p.add_argument("--base-splitting", type=float, help="axial baseline D0 of the unstrained defect, MHz")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    _add_format(p, default="json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="extract strain couplings from a dataset")
    p.add_argument("dataset", help="JSON dataset file")
    _add_format(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("hamiltonian", help="evaluate the deformation Hamiltonian")
    _add_material(p)
    p.add_argument("--strain", nargs="+", metavar="eIJ=VALUE", help="strain tensor components, e.g. ezz=1e-3")
    p.add_argument("--stress", nargs="+", metavar="sIJ=GPA", help="stress components in GPa, e.g. szz=1")
    p.add_argument("--base-splitting", type=float, help="unperturbed D0 in MHz, enables transition output")
    _add_format(p)
    p.set_defaults(func=cmd_hamiltonian)

    p = sub.add_parser("sensitivity", help="shot-noise-limited stress sensitivity table")
    p.add_argument("--preset", default="nv-vs-divacancy", help="scenario preset name")
    p.add_argument("--config", help="scenario TOML file")
    p.add_argument("--beta-convention", choices=BETA_CONVENTIONS[:-1], default=DEFAULT_BETA_CONVENTION)
    p.add_argument("--coupling", type=float, help="single scenario: coupling, MHz/GPa")
    p.add_argument("--contrast", type=float, help="single scenario: readout contrast")
    p.add_argument("--count-rate", type=float, help="single scenario: counts/s")
    p.add_argument("--readout", type=float, default=350e-9, help="single scenario: readout duration, s")
    p.add_argument("--t2", type=float, help="single scenario: T2, s")
    p.add_argument("--label", default="scenario")
    _add_format(p, default="csv")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("presets", help="preset management")
    psub = p.add_subparsers(dest="presets_command", required=True)
    pl = psub.add_parser("list", help="list available presets")
    _add_format(pl)
    pl.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpinStressError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, SymmetryError) and exc.residual is not None:
            print(f"residual: {exc.residual:.3e}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # malformed JSON or arrays rejected by input validation
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
