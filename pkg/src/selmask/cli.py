"""Command-line front end: train-scorer, calibrate, score, mask, stats."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import CONFIG_ENV, RunConfig, load_config
from .embeddings import load_embeddings
from .errors import CalibrationError, ConfigError, DataFormatError
from .lexicon import load_lexicon
from .maskfn import calibrate
from .pipeline import Masker, run_pipeline, sample_token_scores
from .scorer import ScoreModel, task_score, train_scorer
from .stats import analyze_jsonl
from .tokenizer import load_vocab

logger = logging.getLogger("selmask")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_CALIBRATION = 0, 2, 3, 4

MODEL_FILE = "score_model.bin"
EXAMPLES_FILE = "examples.jsonl"
REPORT_FILE = "run_report.txt"
RESOLVED_CONFIG_FILE = "resolved_config.ini"


def _config(args, **overrides) -> RunConfig:
    cfg = load_config(args.config)
    cfg.set_values(**overrides)
    return cfg


def _model_path(cfg: RunConfig) -> str:
    return cfg.model or os.path.join(cfg.output_dir, MODEL_FILE)


def cmd_train_scorer(args) -> int:
    cfg = _config(args, seeds_lo=args.seeds_lo, seeds_hi=args.seeds_hi, embeddings=args.embeddings,
                  model=args.out, reg_c=args.reg_c, epochs=args.epochs, scorer_seed=args.seed,
                  sidedness=args.sidedness)
    cfg.validate(require=("seeds_lo", "seeds_hi", "embeddings"))
    norm = cfg.normalization
    lexicon = load_lexicon(cfg.seeds_lo, cfg.seeds_hi, norm)
    table = load_embeddings(cfg.embeddings, norm)
    model = train_scorer(lexicon, table, cfg.reg_c, cfg.epochs, cfg.scorer_seed, cfg.effective_oov_score)
    path = _model_path(cfg)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    model.save(path)
    st = model.stats
    print(f"model = {path}")
    print(f"train_words = {st.n_train}")
    print(f"dropped_words = {len(st.dropped)}")
    print(f"train_accuracy = {st.accuracy:.6f}")
    print(f"margin = {st.margin:.6f}")
    print(f"iterations = {st.iterations}")
    print(f"scale_k = {model.k!r}")
    print(f"bias = {model.b!r}")
    return EXIT_OK


def _read_scores_file(path):
    scores, weights = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                scores.append(float(parts[0]))
                weights.append(float(parts[1]) if len(parts) > 1 else 1.0)
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad score line {line.strip()!r}") from None
    return np.array(scores), np.array(weights)


def _shape(cfg: RunConfig) -> dict:
    """Fixed shape constants carried into calibration (the pivot/shape alpha of linear and exponential)."""
    if cfg.family in ("linear", "exponential") and cfg.alpha is not None:
        return {"alpha": cfg.alpha}
    return {}


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    if (args.family and args.family != cfg.family) or (args.sidedness and args.sidedness != cfg.sidedness):
        # constants solved for another function do not carry over
        cfg.alpha = cfg.beta = cfg.gamma = None
        cfg.calibrated = False
    cfg.set_values(model=args.model, family=args.family, sidedness=args.sidedness,
                   target_rate=args.target_rate, tolerance=args.tolerance, sample_size=args.sample_size,
                   alpha=args.alpha)
    cfg.validate()
    if args.scores_file:
        scores, weights = _read_scores_file(args.scores_file)
        size = len(scores)
    else:
        cfg.validate(require=("corpus", "vocab", "embeddings"))
        norm = cfg.normalization
        model_path = _model_path(cfg)
        if not Path(model_path).exists():
            raise ConfigError(f"model: path does not exist: {model_path}")
        model = ScoreModel.load(model_path).with_oov_score(cfg.effective_oov_score)
        scores = sample_token_scores(cfg.corpus, load_vocab(cfg.vocab), model,
                                     load_embeddings(cfg.embeddings, norm), cfg.sequence(),
                                     cfg.sample_size, norm)
        weights = None
        size = len(scores)
    if size == 0:
        raise CalibrationError("unreachable target rate: empty score sample")
    fn, report = calibrate(cfg.family, cfg.sidedness, scores, weights, cfg.target_rate,
                           cfg.tolerance, sample_size=size, **_shape(cfg))
    for line in report.lines():
        print(line)
    print(f"alpha = {fn.alpha!r}")
    print(f"beta = {fn.beta!r}")
    print(f"gamma = {fn.gamma!r}")
    if not report.converged:
        print("warning: tolerance not met; closest attainable rate reported", file=sys.stderr)
    cfg.set_values(alpha=fn.alpha, beta=fn.beta, gamma=fn.gamma, calibrated=True)
    out = args.write or args.config or os.environ.get(CONFIG_ENV)
    if out:
        cfg.save(out)
        print(f"config = {out}")
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = _config(args, model=args.model, embeddings=args.embeddings)
    cfg.validate(require=("embeddings",))
    model_path = _model_path(cfg)
    if not Path(model_path).exists():
        raise ConfigError(f"model: path does not exist: {model_path}")
    model = ScoreModel.load(model_path)
    if args.oov_score is not None:
        model = model.with_oov_score(args.oov_score)
    norm = cfg.normalization
    table = load_embeddings(cfg.embeddings, norm)
    for line in sys.stdin:
        word = line.strip()
        if not word:
            continue
        print(f"{word}\t{task_score(model, norm(word), table)}")
    return EXIT_OK


def _maybe_lexicon(cfg):
    if cfg.seeds_lo and cfg.seeds_hi and Path(cfg.seeds_lo).exists() and Path(cfg.seeds_hi).exists():
        return load_lexicon(cfg.seeds_lo, cfg.seeds_hi, cfg.normalization)
    return None


def cmd_mask(args) -> int:
    cfg = _config(args, strategy=args.strategy, rng_seed=args.seed, workers=args.workers,
                  output_dir=args.output_dir, max_seq_len=args.max_seq_len)
    cfg.validate(require=("corpus", "vocab"))
    norm = cfg.normalization
    vocab = load_vocab(cfg.vocab)
    seq_cfg = cfg.sequence()
    lexicon = _maybe_lexicon(cfg)
    fn = model = table = None
    if cfg.strategy == "selective":
        cfg.validate(require=("embeddings",))
        model_path = _model_path(cfg)
        if not Path(model_path).exists():
            raise ConfigError(f"model: path does not exist: {model_path}")
        model = ScoreModel.load(model_path).with_oov_score(cfg.effective_oov_score)
        table = load_embeddings(cfg.embeddings, norm)
        if not cfg.calibrated:
            logger.info("masking function not calibrated; calibrating on the corpus first")
            sample = sample_token_scores(cfg.corpus, vocab, model, table, seq_cfg, cfg.sample_size, norm)
            fn, _ = calibrate(cfg.family, cfg.sidedness, sample, None, cfg.target_rate, cfg.tolerance,
                              **_shape(cfg))
            cfg.set_values(alpha=fn.alpha, beta=fn.beta, gamma=fn.gamma, calibrated=True)
        fn = cfg.maskfn()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    masker = Masker(vocab, seq_cfg, fn, model, table, lexicon, norm)
    report = run_pipeline(cfg.corpus, out_dir / EXAMPLES_FILE, masker, workers=cfg.workers,
                          settings={"oov_score": cfg.effective_oov_score if model is not None else "n/a"})
    report.write(out_dir / REPORT_FILE)
    resolved = RunConfig(**{k: v for k, v in vars(cfg).items() if k != "source"})
    resolved.set_values(output_dir=str(out_dir.resolve()))
    resolved.save(out_dir / RESOLVED_CONFIG_FILE)
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = _config(args, vocab=args.vocab, seeds_lo=args.seeds_lo, seeds_hi=args.seeds_hi)
    cfg.validate(require=("vocab",))
    if not Path(args.input).exists():
        raise ConfigError(f"input: path does not exist: {args.input}")
    st = analyze_jsonl(args.input, load_vocab(cfg.vocab), _maybe_lexicon(cfg))
    for line in st.lines():
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="selmask", description="Task-specific selective masking for MLM data.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help=f"run config file (default: ${CONFIG_ENV})")

    sp = sub.add_parser("train-scorer", help="train the seed-word separator and save the score model")
    common(sp)
    sp.add_argument("--seeds-lo", help="word list anchored at score 0")
    sp.add_argument("--seeds-hi", help="word list anchored at score 10")
    sp.add_argument("--embeddings", help="word2vec text file")
    sp.add_argument("--out", help="model output path")
    sp.add_argument("--reg-c", type=float)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sidedness", help="sets the default OOV score stored in the model")
    sp.set_defaults(func=cmd_train_scorer)

    sp = sub.add_parser("calibrate", help="solve the masking-function constant for the target rate")
    common(sp)
    sp.add_argument("--model")
    sp.add_argument("--scores-file", help="use 'score [weight]' lines instead of sampling the corpus")
    sp.add_argument("--family")
    sp.add_argument("--sidedness")
    sp.add_argument("--target-rate", type=float)
    sp.add_argument("--tolerance", type=float)
    sp.add_argument("--sample-size", type=int)
    sp.add_argument("--alpha", type=float, help="fixed shape alpha for linear/exponential")
    sp.add_argument("--write", help="config path to write (default: the input config)")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("score", help="print word<TAB>score for words read from stdin")
    common(sp)
    sp.add_argument("--model")
    sp.add_argument("--embeddings")
    sp.add_argument("--oov-score", type=float)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("mask", help="write masked MLM examples as JSONL plus a run report")
    common(sp)
    sp.add_argument("--strategy")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--max-seq-len", type=int)
    sp.add_argument("--output-dir")
    sp.set_defaults(func=cmd_mask)

    sp = sub.add_parser("stats", help="re-derive masking statistics from a JSONL file")
    common(sp)
    sp.add_argument("input")
    sp.add_argument("--vocab")
    sp.add_argument("--seeds-lo")
    sp.add_argument("--seeds-hi")
    sp.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
