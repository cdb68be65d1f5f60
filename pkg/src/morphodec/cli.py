"""Command-line pipeline: compile, simulate, decode, analyze, evaluate, run.

Every experiment knob lives in a flat ``key=value`` config file; each CLI
flag overrides its config key, so a config plus a seed is a complete,
reproducible experiment manifest.  Output files are written to a temporary
path and atomically renamed, so a failed run never leaves partial outputs
in place.

Exit codes: 0 success, 2 usage error, 3 data/validation error, 4 at least
one record had no analysis while ``--strict`` was set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import assets
from .analyzer import NO_ANALYSIS_MARK, analyze, format_output_lines
from .decoder import (ObservationSeq, PruneConfig, ViterbiDecoder, decode_exact,
                      format_observation_lines, read_observation_file)
from .errors import MorphodecError, NoAnalysis
from .evaluation import EvalCounts, align_and_count, counts_json, counts_table
from .simulator import (NoiseChannel, NoiseConfig, derive_seed, frame_expand,
                        noise_preset, read_corpus_file, read_corpus_lines)
from .trie_hmm import HmmParams

EXIT_DATA = 3
EXIT_NO_ANALYSIS = 4


def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(path, lines):
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def read_config(path) -> dict:
    """Flat ``key=value`` text; '#' comments; later keys win."""
    config = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise MorphodecError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            config[key.strip()] = value.strip()
    return config


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _resolve(args, key, default, kind=str):
    """Flag > config file > default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is None:
        value = getattr(args, "_config", {}).get(key)
        if value is not None and kind is bool:
            try:
                value = _BOOL[str(value).lower()]
            except KeyError:
                raise MorphodecError(f"config key {key}: bad boolean {value!r}") from None
        elif value is not None:
            value = kind(value)
    if value is None:
        value = default
    return value


def _load_pack(args):
    index_dir = getattr(args, "index", None)
    if index_dir:
        candidate = Path(index_dir)
        if candidate.is_file():
            return assets.load_pack(candidate)
        packed = candidate / "pack.bin"
        if packed.exists():
            return assets.load_pack(packed)
        return assets.LanguagePack.load(candidate)
    return assets.LanguagePack.bundled()


def _hmm_params(args, pack):
    return HmmParams(
        alpha=_resolve(args, "alpha", 0.8, float),
        beta=_resolve(args, "beta", 0.9, float),
        m=len(pack.inventory),
        normalize_emissions=_resolve(args, "normalize-emissions", False, bool),
    )


def _prune_config(args):
    return PruneConfig(
        enabled=_resolve(args, "prune", True, bool),
        min_mismatch_allowance=_resolve(args, "min-mismatch-allowance", 1, int),
        mismatch_fraction=_resolve(args, "mismatch-fraction", 0.34, float),
        per_symbol_floor=_resolve(args, "per-symbol-floor", None, float),
    )


def _noise_config(args) -> NoiseConfig:
    seed = _resolve(args, "seed", 0, int)
    preset = _resolve(args, "preset", None)
    if preset:
        base = noise_preset(preset, seed=seed)
        scale = _resolve(args, "noise-scale", 1.0, float)
        return base.scaled(scale)
    return NoiseConfig(
        del_rate=_resolve(args, "del-rate", 0.0, float),
        sub_rate=_resolve(args, "sub-rate", 0.0, float),
        ins_rate=_resolve(args, "ins-rate", 0.0, float),
        confusion_mode=_resolve(args, "confusion", "uniform"),
        seed=seed,
    )


def _frame_mode(args):
    raw = _resolve(args, "frame-mode", None)
    if not raw:
        return None
    try:
        lo, hi = (int(x) for x in str(raw).split(","))
    except ValueError:
        raise MorphodecError(f"--frame-mode wants MIN,MAX, got {raw!r}") from None
    return lo, hi


def _read_corpus(args, pack):
    corpus = getattr(args, "corpus", None)
    if corpus:
        return read_corpus_file(corpus, pack.table, pack.inventory)
    return read_corpus_lines(assets.bundled_corpus_text().splitlines(),
                             pack.table, pack.inventory, source="bundled corpus")


# ---------------------------------------------------------------- compile

def cmd_compile(args):
    overrides = {role: getattr(args, role)
                 for role in assets.PACK_FILES if getattr(args, role, None)}
    if getattr(args, "pack_dir", None):
        pack = assets.LanguagePack.load(args.pack_dir, overrides)
    elif overrides:
        base = {role: assets._read_asset(name).splitlines()
                for role, name in assets.PACK_FILES.items()}
        for role, path in overrides.items():
            base[role] = Path(path).read_text(encoding="utf-8").splitlines()
        pack = assets.LanguagePack.from_sources(base)
    else:
        pack = assets.LanguagePack.bundled()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    assets.save_pack(pack, out / "pack.bin")
    counts = pack.inventory.counts
    diagnostics = [
        f"entries\t{len(pack.entries)}",
        f"trie_states\t{len(pack.index)}",
        f"junction_states\t{len(pack.index.junction_states())}",
        f"terminal_states\t{len(pack.index.terminal_states())}",
        f"inventory\t{len(pack.inventory)}",
    ] + [f"inventory_{kind}\t{n}" for kind, n in sorted(counts.items())]
    _atomic_write(out / "diagnostics.txt", "\n".join(diagnostics) + "\n")
    print(f"compiled {len(pack.entries)} entries into {len(pack.index)} states -> {out}")


# ---------------------------------------------------------------- simulate

def cmd_simulate(args):
    pack = _load_pack(args)
    records = _read_corpus(args, pack)
    cfg = _noise_config(args)
    frame = _frame_mode(args)
    channel = NoiseChannel(pack.inventory, cfg)
    observations = []
    for i, record in enumerate(records):
        obs, _ = channel.corrupt(record, derive_seed(cfg.seed, i))
        if frame:
            obs = frame_expand(obs, frame[0], frame[1], derive_seed(cfg.seed, i) + 1)
        observations.append(obs)
    header = f"seed={cfg.seed} cfg={cfg.describe()}" + (f" frame={frame}" if frame else "")
    _emit(args.out, format_observation_lines(observations, header))
    if getattr(args, "ref_out", None):
        refs = [ObservationSeq(r.reference) for r in records]
        _emit(args.ref_out, format_observation_lines(refs, "reference streams"))


# ---------------------------------------------------------------- decode

def cmd_decode(args):
    pack = _load_pack(args)
    sequences = read_observation_file(args.obs)
    params = _hmm_params(args, pack)
    if getattr(args, "exact", False):
        lattices = [decode_exact(obs, pack.index, params) for obs in sequences]
    else:
        decoder = ViterbiDecoder(pack.index, params, _prune_config(args))
        lattices = [decoder.decode(obs) for obs in sequences]
    lines = []
    for i, lattice in enumerate(lattices):
        lines.append(f"# record {i} candidates {len(lattice)}")
        if args.dump_lattice:
            lines.extend(lattice.dump_lines())
    _emit(args.out, lines)


# ---------------------------------------------------------------- analyze

def _analyze_batch(pack, params, prune, cap, topk, surface, sequences):
    decoder = ViterbiDecoder(pack.index, params, prune)
    results = []
    for obs in sequences:
        try:
            outs = analyze(obs, decoder, pack.morph, pack.phon, pack.tags,
                           cap=cap, topk=topk, surface=surface)
        except NoAnalysis:
            outs = []
        results.append(outs)
    return results


def _analyze_all(pack, params, prune, cap, topk, surface, sequences, jobs):
    if jobs and jobs > 1 and len(sequences) > 1:
        from joblib import Parallel, delayed
        chunks = [sequences[i::jobs] for i in range(jobs)]
        partial = Parallel(n_jobs=jobs)(
            delayed(_analyze_batch)(pack, params, prune, cap, topk, surface, chunk)
            for chunk in chunks
        )
        results = [None] * len(sequences)
        for lane, chunk_results in enumerate(partial):
            for j, outs in enumerate(chunk_results):
                results[lane + j * jobs] = outs
        return results
    return _analyze_batch(pack, params, prune, cap, topk, surface, sequences)


def cmd_analyze(args):
    pack = _load_pack(args)
    if getattr(args, "matrices", None):
        matrices = Path(args.matrices)
        pack.tags = _load_tags(matrices / "tags.tsv", pack)
        from .lexicon import MorphConnectivity, PhonConnectivity
        pack.morph = MorphConnectivity.from_file(matrices / "morph_matrix.tsv", pack.tags)
        pack.phon = PhonConnectivity.from_file(matrices / "phon_matrix.tsv", pack.table)
    sequences = read_observation_file(args.obs)
    results = _analyze_all(
        pack, _hmm_params(args, pack), _prune_config(args),
        _resolve(args, "cap", 16, int), _resolve(args, "topk", 1, int),
        _resolve(args, "surface", False, bool), sequences,
        _resolve(args, "jobs", 1, int),
    )
    lines = []
    missing = 0
    for outs in results:
        if not outs:
            missing += 1
            lines.append(f"1\t{NO_ANALYSIS_MARK}\t0.000000")
        else:
            lines.extend(format_output_lines(outs, verbose=args.verbose))
    _emit(args.out, lines)
    if missing and _resolve(args, "strict", False, bool):
        print(f"{missing} record(s) had no analysis", file=sys.stderr)
        raise SystemExit(EXIT_NO_ANALYSIS)


def _load_tags(path, pack):
    from .lexicon import TagSet
    return TagSet.from_file(path) if Path(path).exists() else pack.tags


# ---------------------------------------------------------------- evaluate

def _read_unit_sequences(path, unit):
    """Gold/hyp readers for both units.

    diphone: observation files (one stream per line).  morpheme: either a
    corpus file (text<TAB>rendering), analyzer output (rank<TAB>rendering
    <TAB>score; rank-1 lines are taken), or bare rendering lines.
    """
    if unit == "diphone":
        return [list(seq.symbols) for seq in read_observation_file(path)]
    sequences = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) >= 3 and fields[0].isdigit():
                if fields[0] != "1":
                    continue
                rendering = fields[1]
            elif len(fields) == 2:
                rendering = fields[1]
            else:
                rendering = fields[0]
            sequences.append([tok for part in rendering.split() for tok in part.split("+")])
    return sequences


def cmd_evaluate(args):
    gold = _read_unit_sequences(args.gold, args.unit)
    hyp = _read_unit_sequences(args.hyp, args.unit)
    if len(gold) != len(hyp):
        raise MorphodecError(f"gold has {len(gold)} records, hyp has {len(hyp)}")
    totals = EvalCounts.zero()
    for g, h in zip(gold, hyp):
        totals = totals + align_and_count(g, h)
    rows = [(args.unit, totals)]
    if args.json:
        _emit(args.out, [json.dumps(counts_json(rows), sort_keys=True)])
    else:
        _emit(args.out, counts_table(rows).splitlines())


# ---------------------------------------------------------------- run

def cmd_run(args):
    pack = _load_pack(args)
    records = _read_corpus(args, pack)
    cfg = _noise_config(args)
    frame = _frame_mode(args)
    out = Path(_resolve(args, "out", "run-output"))

    channel = NoiseChannel(pack.inventory, cfg)
    observations = []
    for i, record in enumerate(records):
        obs, _ = channel.corrupt(record, derive_seed(cfg.seed, i))
        if frame:
            obs = frame_expand(obs, frame[0], frame[1], derive_seed(cfg.seed, i) + 1)
        observations.append(obs)

    results = _analyze_all(
        pack, _hmm_params(args, pack), _prune_config(args),
        _resolve(args, "cap", 16, int), 1,
        _resolve(args, "surface", False, bool), observations,
        _resolve(args, "jobs", 1, int),
    )
    renderings = [outs[0].rendering if outs else NO_ANALYSIS_MARK for outs in results]

    morph_counts = EvalCounts.zero()
    for record, rendering in zip(records, renderings):
        morph_counts = morph_counts + align_and_count(
            record.morpheme_tokens(),
            [] if rendering == NO_ANALYSIS_MARK else
            [tok for part in rendering.split() for tok in part.split("+")],
        )
    diphone_counts = EvalCounts.zero()
    for record, obs in zip(records, observations):
        diphone_counts = diphone_counts + align_and_count(record.reference, obs.symbols)

    header = f"seed={cfg.seed} cfg={cfg.describe()}" + (f" frame={frame}" if frame else "")
    _emit(out / "observations.txt", format_observation_lines(observations, header))
    _emit(out / "analyses.txt", [f"1\t{r}\t0" for r in renderings])
    rows = [("diphone", diphone_counts), ("morpheme", morph_counts)]
    _emit(out / "evaluation.txt", counts_table(rows).splitlines())
    _emit(out / "evaluation.json", [json.dumps(counts_json(rows), sort_keys=True)])
    print(counts_table(rows))
    missing = sum(1 for r in renderings if r == NO_ANALYSIS_MARK)
    if missing and _resolve(args, "strict", False, bool):
        print(f"{missing} record(s) had no analysis", file=sys.stderr)
        raise SystemExit(EXIT_NO_ANALYSIS)


# ---------------------------------------------------------------- parser

def _add_model_flags(sub):
    sub.add_argument("--alpha", type=float, help="self-transition probability")
    sub.add_argument("--beta", type=float, help="match emission probability")
    sub.add_argument("--normalize-emissions", action="store_const", const=True, default=None)
    sub.add_argument("--prune", type=lambda v: _BOOL[v.lower()], default=None,
                     help="enable candidate pruning (true/false)")
    sub.add_argument("--min-mismatch-allowance", type=int, default=None)
    sub.add_argument("--mismatch-fraction", type=float, default=None)
    sub.add_argument("--per-symbol-floor", type=float, default=None)


def _add_noise_flags(sub):
    sub.add_argument("--preset", help="noise preset name (e.g. paper-fig10)")
    sub.add_argument("--noise-scale", type=float, default=None,
                     help="scale factor applied to the preset rates")
    sub.add_argument("--del-rate", type=float, default=None)
    sub.add_argument("--sub-rate", type=float, default=None)
    sub.add_argument("--ins-rate", type=float, default=None)
    sub.add_argument("--confusion", choices=["uniform", "same_vowel_group"], default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--frame-mode", default=None, metavar="MIN,MAX",
                     help="repeat each symbol uniformly in [MIN,MAX]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morphodec",
        description="Morpheme-level decoding of noisy diphone streams.",
    )
    parser.add_argument("--config", help="flat key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="validate assets and build the trie index")
    p.add_argument("--pack-dir", help="directory of asset files (default: bundled)")
    for role in assets.PACK_FILES:
        p.add_argument(f"--{role.replace('_', '-')}", help=f"override the {role} file")
    p.add_argument("--out", required=True, help="output directory for the compiled pack")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="emit noisy observation files from a corpus")
    p.add_argument("--corpus", help="gold corpus file (default: bundled)")
    p.add_argument("--index", help="compiled pack dir/file or asset dir")
    _add_noise_flags(p)
    p.add_argument("--out", help="observation file (default: stdout)")
    p.add_argument("--ref-out", help="also write the clean reference streams here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decode", help="spot morpheme candidates in observation files")
    p.add_argument("--index", help="compiled pack dir/file or asset dir")
    p.add_argument("--obs", required=True)
    p.add_argument("--dump-lattice", action="store_true")
    p.add_argument("--exact", action="store_true", help="exact-trie-match baseline")
    _add_model_flags(p)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("analyze", help="full analysis of observation files")
    p.add_argument("--index", help="compiled pack dir/file or asset dir")
    p.add_argument("--matrices", help="directory with matrix/tag overrides")
    p.add_argument("--obs", required=True)
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--topk", type=int, default=None)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--surface", action="store_const", const=True, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--strict", action="store_const", const=True, default=None)
    _add_model_flags(p)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", help="score hypothesis files against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--unit", choices=["diphone", "morpheme"], required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="simulate + analyze + evaluate in one pass")
    p.add_argument("--corpus", help="gold corpus file (default: bundled)")
    p.add_argument("--index", help="compiled pack dir/file or asset dir")
    _add_noise_flags(p)
    _add_model_flags(p)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--surface", action="store_const", const=True, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--strict", action="store_const", const=True, default=None)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._config = read_config(args.config) if args.config else {}
    try:
        args.func(args)
    except SystemExit:
        raise
    except MorphodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
