"""Command line entry: run, verify and eval subcommands."""

from pathlib import Path
from typing import Optional
import argparse
import logging
import sys

from iwkinetic.archive import ArchiveError, open_archive, record_run
from iwkinetic.config import ConfigError, config_hash, initial_spectrum, load_config, run_config
from iwkinetic.models import ConfigFile
from iwkinetic.solver.collision import TriadTable, energy_transfer, resonance_fraction
from iwkinetic.solver.evolution import (
    AdmissibilityError,
    StepError,
    build_envelope,
    build_table,
    collide,
    envelope_lower,
    evolve,
)
from iwkinetic.solver.spectrum import grid_from_spec
from iwkinetic.verify.checks import CheckError, run_suite
from iwkinetic.writers import (
    header_line,
    snapshot_name,
    write_collision_dump,
    write_ledger,
    write_report,
    write_spectrum,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iwkinetic",
        description="Near-resonance three-wave kinetic solver and estimate verifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "evolve the initial spectrum and write the moment ledger"),
        ("verify", "run the verification suite and write report.json"),
        ("eval", "evaluate the collision operator once and dump it"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, type=Path)
        cmd.add_argument("--out", type=Path, default=Path("out"))
        cmd.add_argument("--strict", action="store_true", help="exit 1 on any flag or check failure")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--verbose", action="store_true")
        if name == "verify":
            cmd.add_argument("--suite", action="append", default=None, help="check name or 'all'")
        if name == "eval":
            cmd.add_argument("--t0", action="store_true", help="evaluate at the initial spectrum")
    return parser


def _run(cfg: ConfigFile, args, digest: str, base_dir: Path) -> int:
    grid = grid_from_spec(cfg.grid)
    f0 = initial_spectrum(cfg, grid, base_dir)
    rcfg = run_config(cfg)
    env = build_envelope(f0, rcfg, cfg.envelope)
    header = header_line(digest, args.seed)

    def snapshot(t: float, f):
        write_spectrum(args.out / snapshot_name(t), f, header, envelope_lower(f0, t, rcfg.params))

    _, ledger = evolve(f0, rcfg, env, on_record=snapshot)
    write_ledger(args.out / "ledger.csv", ledger, header)
    ok = ledger.all_flags_pass()
    code = EXIT_FAILED if args.strict and not ok else EXIT_OK
    record_run(open_archive(args.out), "run", digest, args.seed, code, entries=ledger.rows)
    logging.info(f"Run finished with {len(ledger.rows)} ledger rows, flags {'pass' if ok else 'FAIL'}")
    return code


def _verify(cfg: ConfigFile, args, digest: str, base_dir: Path) -> int:
    grid = grid_from_spec(cfg.grid)
    f0 = initial_spectrum(cfg, grid, base_dir)
    seed = args.seed if args.seed is not None else cfg.verify.seed
    suites = args.suite or cfg.verify.suite
    report = run_suite(cfg, f0, seed, suites)
    write_report(args.out / "report.json", report, digest)
    code = EXIT_OK if report.passed or not args.strict else EXIT_FAILED
    record_run(open_archive(args.out), "verify", digest, seed, code, checks=report.records)
    failed = [record.name for record in report.records if not record.passed]
    if failed:
        logging.warning(f"Failed checks: {', '.join(failed)}")
    return code


def _eval(cfg: ConfigFile, args, digest: str, base_dir: Path) -> int:
    grid = grid_from_spec(cfg.grid)
    f0 = initial_spectrum(cfg, grid, base_dir)
    p = cfg.physical
    table = build_table(grid, p, cfg.run.mode)
    result = collide(f0, p, table)
    write_collision_dump(args.out / "eval.csv", f0, result, header_line(digest, args.seed))
    if isinstance(table, TriadTable):
        logging.info(
            f"Energy transfer {energy_transfer(f0, p, table):.6g}, "
            f"resonance fraction {resonance_fraction(f0, p, table):.4f}"
        )
    return EXIT_OK


COMMANDS = {"run": _run, "verify": _verify, "eval": _eval}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        logging.exception(f"Configuration error: {e}")
        return EXIT_CONFIG
    args.out.mkdir(parents=True, exist_ok=True)
    digest = config_hash(cfg)
    try:
        return COMMANDS[args.command](cfg, args, digest, args.config.parent)
    except (ConfigError, AdmissibilityError) as e:
        logging.exception(f"Configuration error in {args.command}: {e}")
        return EXIT_CONFIG
    except (StepError, CheckError, ArchiveError) as e:
        logging.exception(f"Error in {args.command}: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
