"""
WaveRoute - 명령행 인터페이스

    python -m src.cli generate fractal --b 9 --layers 2 --grid 3x3 --out coupler.json
    python -m src.cli generate haar --optimize --out haar.json
    python -m src.cli validate coupler.json --clearance 0.5
    python -m src.cli simulate coupler.json --loss 2.71,1.14,1.67 --split 0.42
    python -m src.cli calibrate 5.52 7.80 10.61
    python -m src.cli convolve haar21.json --image image.csv --out features.csv
    python -m src.cli scale --pitch 20 --n 16 64 256 --out scaling.csv
    python -m src.cli export coupler.json --format mesh --out coupler.stl

종료 코드: 0 성공, 1 검증 실패, 2 오류
"""

from pathlib import Path
from typing import Optional, Sequence, Tuple
import argparse
import logging
import sys

import numpy as np
import pandas as pd

from .core.config import WaverouteConfig, load_config, worker_count
from .core.errors import WaverouteError
from .diagnostics.validator import create_manufacturing_limits, validate_circuit
from .generators.fractal import Chirality, FractalSpec, generate_coupler_array
from .generators.haar import default_kernel_set, generate_filter_unit, load_kernel_set, tile_filter_array
from .io.files import atomic_write_text, write_json
from .io.mesh_export import export_mesh
from .io.netlist import export_netlist, import_netlist
from .io.toolpath_export import export_toolpath
from .optimization.port_assignment import AssignmentGeometry, optimize_port_assignment
from .reports.scaling_report import scaling_report
from .simulation.calibration import calibrate_losses, predict_measurements
from .simulation.optics import (
    LossModel, SplitModel, haar_convolve, injected_power, linear_to_db, propagate_power,
)
from .simulation.statistics import splitting_report

logger = logging.getLogger("waveroute")

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_ERROR = 2


def setup_logging(verbose: bool = False, level: str = "INFO") -> None:
    """로깅 설정"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def _grid(text: str) -> Tuple[int, int]:
    try:
        n, m = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 3x3, got {text!r}") from None
    return n, m


def _limits(config: WaverouteConfig, clearance: Optional[float] = None, r_min: Optional[float] = None):
    v = config.validation
    return create_manufacturing_limits(
        clearance=_pick(clearance, v.clearance),
        r_min=_pick(r_min, v.r_min),
        junction_factor=v.junction_factor,
        sample_pitch=config.geometry.sample_pitch,
    )


def _loss(config: WaverouteConfig, text: Optional[str]) -> LossModel:
    if text:
        return LossModel.parse(text)
    o = config.optics
    return LossModel(o.injection_db, o.propagation_db, o.coupling_db)


def _split(config: WaverouteConfig, text: Optional[str]) -> SplitModel:
    if text:
        return SplitModel.parse(text)
    return SplitModel(tuple(config.optics.central_fraction))


def _pick(value, fallback):
    return fallback if value is None else value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="waveroute", description="3D photonic waveguide interconnect compiler")
    parser.add_argument("--config", help="YAML/JSON config file (flags override config)")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parser.add_argument("--seed", type=int, default=None, help="reserved (no stochastic operations)")
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", help="generate circuit geometry")
    kinds = generate.add_subparsers(dest="kind", required=True)

    fractal = kinds.add_parser("fractal", help="fractal fan-out coupler (array)")
    fractal.add_argument("--b", type=int)
    fractal.add_argument("--layers", type=int)
    fractal.add_argument("--pitch", type=float, help="output pitch D0 (µm)")
    fractal.add_argument("--grid", type=_grid, default=(1, 1), help="input grid, e.g. 15x15")
    fractal.add_argument("--input-pitch", type=float, help="input pitch (µm, multiple of D0)")
    fractal.add_argument("--height-factor", type=float)
    fractal.add_argument("--chirality", choices=[c.value for c in Chirality])
    fractal.add_argument("--scale", type=float, default=1.0)
    fractal.add_argument("--out", required=True, help="netlist output path")

    haar = kinds.add_parser("haar", help="Haar filter unit / stride-3 array")
    haar.add_argument("--kernels", help="JSON file with a kernels block")
    haar.add_argument("--pitch", type=float)
    haar.add_argument("--height", type=float)
    haar.add_argument("--image-side", type=int, help="tile an image_side × image_side array")
    haar.add_argument("--chirality", choices=[c.value for c in Chirality])
    haar.add_argument("--optimize", action="store_true", help="optimize filter → output port assignment")
    haar.add_argument("--out", required=True)

    validate = sub.add_parser("validate", help="manufacturability checks")
    validate.add_argument("netlist")
    validate.add_argument("--clearance", type=float)
    validate.add_argument("--r-min", type=float)
    validate.add_argument("--report", help="JSON report path")

    simulate = sub.add_parser("simulate", help="incoherent power flow")
    simulate.add_argument("netlist")
    simulate.add_argument("--loss", help="I,P,C in dB")
    simulate.add_argument("--split", help="per-layer central fractions, e.g. 0.42 or 0.57,0.57")
    simulate.add_argument("--input", action="append", help="input port id (default: all)")
    simulate.add_argument("--out", help="CSV of output port powers")
    simulate.add_argument("--splitting", action="store_true", help="central-fraction statistics")

    calibrate = sub.add_parser("calibrate", help="separate I, P, C from three measurements")
    calibrate.add_argument("l_1x9", type=float)
    calibrate.add_argument("l_1x9_triple", type=float)
    calibrate.add_argument("l_1x81", type=float)

    convolve = sub.add_parser("convolve", help="drive a filter array with an image")
    convolve.add_argument("netlist")
    convolve.add_argument("--image", required=True, help="CSV (no header) or .npy intensity array")
    convolve.add_argument("--loss", help="I,P,C in dB (default lossless)")
    convolve.add_argument("--split")
    convolve.add_argument("--out", help="CSV feature map (filter, u, v, power)")

    scale = sub.add_parser("scale", help="2D vs 3D footprint scaling")
    scale.add_argument("--pitch", type=float)
    scale.add_argument("--n", type=int, nargs="+")
    scale.add_argument("--out", help="CSV report path")

    export = sub.add_parser("export", help="export a netlist to other formats")
    export.add_argument("netlist")
    export.add_argument("--format", choices=["netlist", "mesh", "toolpath"], default="netlist")
    export.add_argument("--out", required=True)
    export.add_argument("--sides", type=int, default=16)
    export.add_argument("--sample-pitch", type=float, default=0.5)
    return parser


def _generate_fractal(args, config: WaverouteConfig) -> int:
    f = config.fractal
    spec = FractalSpec(
        b=_pick(args.b, f.b),
        layers=_pick(args.layers, f.layers),
        d0=_pick(args.pitch, f.d0),
        height_factor=_pick(args.height_factor, f.height_factor),
        chirality=Chirality(_pick(args.chirality, f.chirality)),
        diameter=config.geometry.diameter,
        scale=args.scale,
        stem_fraction=f.stem_fraction,
        bow_factor=f.bow_factor,
        ramp_factor=f.ramp_factor,
        z_bow_factor=f.z_bow_factor,
    )
    circuit = generate_coupler_array(
        spec, args.grid, args.input_pitch, max_workers=worker_count(config.runtime.threads),
    )
    export_netlist(circuit, args.out)
    print(f"N_I={len(circuit.inputs())} N_O={len(circuit.outputs())} segments={len(circuit.segments)}")
    return EXIT_OK


def _generate_haar(args, config: WaverouteConfig) -> int:
    h = config.haar
    kernels_file = _pick(args.kernels, h.kernels_file)
    ks = load_kernel_set(kernels_file) if kernels_file else default_kernel_set()
    d0 = _pick(args.pitch, h.d0)
    height = _pick(args.height, h.height)
    if args.optimize:
        perm, cost = optimize_port_assignment(
            ks, AssignmentGeometry(d0, height), max_workers=worker_count(config.runtime.threads),
        )
        ks = ks.with_assignment(perm)
        print(f"assignment={list(perm)} wire_length={cost:.3f} um")
    chirality = Chirality(_pick(args.chirality, config.fractal.chirality))
    limits = _limits(config)
    if args.image_side:
        circuit = tile_filter_array(ks, args.image_side, d0, height, chirality, config.geometry.diameter, limits)
    else:
        circuit = generate_filter_unit(ks, d0, height, chirality, config.geometry.diameter, limits)
    export_netlist(circuit, args.out)
    print(f"N_I={len(circuit.inputs())} N_O={len(circuit.outputs())} segments={len(circuit.segments)}")
    return EXIT_OK


def _validate(args, config: WaverouteConfig) -> int:
    circuit = import_netlist(args.netlist)
    limits = _limits(config, args.clearance, args.r_min)
    report = validate_circuit(circuit, limits)
    if args.report:
        write_json(args.report, report.to_dict())
    print(f"{'PASS' if report.passed else 'FAIL'} violations={len(report.clearance_violations)} "
          f"min_radius={report.min_bend_radius_found:.3f} max_aspect={report.max_aspect_ratio:.1f}")
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


def _simulate(args, config: WaverouteConfig) -> int:
    circuit = import_netlist(args.netlist)
    lm = _loss(config, args.loss)
    sm = _split(config, args.split)
    ports = args.input or [p.id for p in circuit.inputs()]
    drive = {port_id: 1.0 for port_id in ports}
    out = propagate_power(circuit, drive, lm, sm)
    total = sum(out[k] for k in sorted(out))
    loss = linear_to_db(total / injected_power(circuit, drive))
    print(f"injected={injected_power(circuit, drive):.6g} output={total:.6g} loss_db={loss:.3f}")
    if args.out:
        table = pd.DataFrame(sorted(out.items()), columns=["port", "power"])
        atomic_write_text(args.out, table.to_csv(index=False, float_format="%.12g", lineterminator="\n"))
    if args.splitting:
        report = splitting_report(circuit, sm)
        print(report.message)
    return EXIT_OK


def _calibrate(args, config: WaverouteConfig) -> int:
    lm = calibrate_losses(args.l_1x9, args.l_1x9_triple, args.l_1x81)
    predicted = predict_measurements(lm)
    print(f"I={lm.injection_db:.4f} P={lm.propagation_db:.4f} C={lm.coupling_db:.4f} (dB)")
    print("predicted: " + " ".join(f"{k}={v:.4f}" for k, v in predicted.to_dict().items()))
    return EXIT_OK


def _read_image(path: str) -> np.ndarray:
    if Path(path).suffix.lower() == ".npy":
        return np.load(path)
    return pd.read_csv(path, header=None).to_numpy(dtype=float)


def _convolve(args, config: WaverouteConfig) -> int:
    circuit = import_netlist(args.netlist)
    lm = LossModel.parse(args.loss) if args.loss else LossModel.lossless()
    features = haar_convolve(circuit, _read_image(args.image), lm, _split(config, args.split))
    rows = [
        {"filter": f + 1, "u": u, "v": v, "power": features[f, u, v]}
        for f in range(features.shape[0]) for u in range(features.shape[1]) for v in range(features.shape[2])
    ]
    table = pd.DataFrame(rows, columns=["filter", "u", "v", "power"])
    if args.out:
        atomic_write_text(args.out, table.to_csv(index=False, float_format="%.12g", lineterminator="\n"))
    print(f"features shape={features.shape} total={features.sum():.6g}")
    return EXIT_OK


def _scale(args, config: WaverouteConfig) -> int:
    s = config.scaling
    report = scaling_report(_pick(args.pitch, s.pitch), _pick(args.n, s.n_values))
    if args.out:
        report.to_csv(args.out)
    print(report.table.to_string(index=False))
    summary = report.summary()
    if summary["slope_area_2d"] is not None:
        print(f"slope_2d={summary['slope_area_2d']:.4f} slope_3d={summary['slope_area_3d']:.4f}")
    return EXIT_OK


def _export(args, config: WaverouteConfig) -> int:
    circuit = import_netlist(args.netlist)
    if args.format == "mesh":
        export_mesh(circuit, args.out, sides=args.sides)
    elif args.format == "toolpath":
        export_toolpath(circuit, args.out, args.sample_pitch)
    else:
        export_netlist(circuit, args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = load_config(args.config) if args.config else WaverouteConfig()
    setup_logging(args.verbose, config.runtime.log_level)

    handlers = {
        "validate": _validate,
        "simulate": _simulate,
        "calibrate": _calibrate,
        "convolve": _convolve,
        "scale": _scale,
        "export": _export,
    }
    try:
        if args.command == "generate":
            handler = _generate_fractal if args.kind == "fractal" else _generate_haar
        else:
            handler = handlers[args.command]
        return handler(args, config)
    except WaverouteError as e:
        logger.error(f"❌ {e}")
        return EXIT_ERROR
    except (OSError, ValueError) as e:
        logger.error(f"❌ {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
