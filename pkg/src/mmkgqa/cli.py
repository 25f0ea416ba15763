"""``mmkgqa`` command-line entry point.

Results go to stdout as JSON, logs to stderr. Exit status: 0 success,
1 invalid input or usage, 2 I/O or remote-service failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections import Counter

from . import __version__
from .config import Settings, load_settings
from .consistency import (
    ConsistencyConfig,
    MockVisionQAClient,
    RemoteVisionQAClient,
    hallucination_rate,
    mismatch_rate,
    read_dataset,
    read_pairs,
)
from .diversity import diversity_report
from .embeddings import HashingEmbedder, RemoteEmbedder
from .errors import MMKGError, StageError, TransportError, ValidationError
from .ingestion import build, write_rejects
from .kg import KnowledgeGraph
from .pipeline import Clients, KGTextClient, PipelineConfig, RemoteTextAnswerClient, answer_question
from .qa import CorpusConfig, Source, generate_corpus, ingest_augmented, load_templates, read_corpus, write_corpus
from .refine import RefineConfig, refine
from .router import (
    MockGenerationClient,
    RemoteGenerationClient,
    build_index,
    format_table,
    read_queries,
    strategy_report,
)
from .textmetrics import score_pair

log = logging.getLogger("mmkgqa")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True, default=_json_default, allow_nan=True)
    sys.stdout.write("\n")


def _json_default(o):
    if hasattr(o, "as_dict"):
        return o.as_dict()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _finite(x):
    return x if isinstance(x, (int, float)) and math.isfinite(x) else str(x)


def _embedder(s: Settings):
    if s.embedder == "hashing":
        return HashingEmbedder(dim=s.embed_dim)
    if s.embedder.startswith(("http://", "https://")):
        return RemoteEmbedder(s.embedder, s.embed_dim, max_in_flight=s.jobs)
    raise ValidationError(f"embedder must be 'hashing' or an http(s) URL, got {s.embedder!r}")


def _gen_client(target: str, out_dir: str, s: Settings):
    if target == "mock":
        return MockGenerationClient(out_dir, s.generation_latency)
    if target.startswith(("http://", "https://")):
        return RemoteGenerationClient(target, max_in_flight=s.jobs)
    raise ValidationError(f"--gen must be 'mock' or an http(s) URL, got {target!r}")


def _vqa_client(target: str, s: Settings):
    if target.startswith("mock:"):
        return MockVisionQAClient.from_file(target[len("mock:"):])
    if target.startswith(("http://", "https://")):
        return RemoteVisionQAClient(target, max_in_flight=s.jobs)
    raise ValidationError(f"--vqa must be 'mock:FILE' or an http(s) URL, got {target!r}")


def _consistency_cfg(s: Settings, embedder) -> ConsistencyConfig:
    return ConsistencyConfig(s.theta_match, s.theta_halluc, s.mismatch_threshold, embedder, s.jobs)


# -- subcommands ------------------------------------------------------------------


def cmd_build_kg(args, s: Settings) -> dict:
    result = build(args.recipes, args.nutrition, args.images)
    if args.out:
        result.kg.save(args.out)
    if args.rejects:
        write_rejects(result.rejects, args.rejects)
    return result.summary()


def cmd_stats(args, s: Settings) -> dict:
    return KnowledgeGraph.load(args.kg).stats()


def cmd_gen_qa(args, s: Settings) -> dict:
    kg = KnowledgeGraph.load(args.kg)
    templates = load_templates(args.templates)
    corpus = generate_corpus(kg, templates, CorpusConfig(limit=args.limit, jobs=s.jobs))
    errors: list = []
    if args.augmented:
        corpus += ingest_augmented(args.augmented, kg, errors)
    write_corpus(corpus, args.out)
    hops = Counter(p.hop.value for p in corpus if p.hop is not None)
    return {
        "pairs": len(corpus),
        "templates": len(templates),
        "by_hop": dict(sorted(hops.items())),
        "augmented": sum(p.source is Source.AUGMENTED for p in corpus),
        "augmented_errors": errors,
        "out": args.out,
    }


def cmd_refine(args, s: Settings) -> dict:
    corpus = read_corpus(args.input)
    cfg = RefineConfig(s.dedupe_threshold, s.k, s.per_cluster_cap, s.seed)
    refined, report = refine(corpus, _embedder(s), cfg, args.blocklist)
    write_corpus(refined, args.out)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            for entry in report["curation_log"]:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return report


def cmd_diversity(args, s: Settings) -> dict:
    corpus = read_corpus(args.input)
    rep = diversity_report(corpus, _embedder(s), k=s.k, seed=s.seed).as_dict()
    return {k: _finite(v) for k, v in rep.items()}


def cmd_mismatch(args, s: Settings) -> dict:
    return mismatch_rate(read_pairs(args.pairs), _embedder(s), s.mismatch_threshold)


def cmd_hallucinate(args, s: Settings) -> dict:
    emb = _embedder(s)
    return hallucination_rate(read_dataset(args.dataset), _vqa_client(args.vqa, s), _consistency_cfg(s, emb))


def cmd_route(args, s: Settings) -> dict:
    emb = _embedder(s)
    kg = KnowledgeGraph.load(args.kg)
    index = build_index(kg, emb)
    consistency = (_vqa_client(args.vqa, s), _consistency_cfg(s, emb)) if args.vqa else None
    report = strategy_report(
        read_queries(args.queries), index, _gen_client(args.gen, args.gen_dir, s), emb,
        s.tau, consistency, s.retrieval_latency,
    )
    print(format_table(report), file=sys.stderr)
    return report


def cmd_answer(args, s: Settings) -> dict:
    emb = _embedder(s)
    kg = KnowledgeGraph.load(args.kg)
    text = RemoteTextAnswerClient(args.text) if args.text else KGTextClient(kg)
    clients = Clients(text, _gen_client(args.gen, args.gen_dir, s), emb, build_index(kg, emb))
    return answer_question(args.question, kg, clients, PipelineConfig(s.tau, s.retrieval_latency)).as_dict()


def cmd_eval_metrics(args, s: Settings) -> dict:
    emb = _embedder(s)
    rows = []
    with open(args.pairs, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                cand, ref = str(obj["candidate"]), str(obj["reference"])
            except (ValueError, KeyError, TypeError) as exc:
                raise ValidationError(f"{args.pairs}:{no}: need candidate and reference ({exc})") from None
            rows.append(score_pair(cand, ref, emb))
    if not rows:
        raise ValidationError("no pairs to score")

    def mean(get):
        return math.fsum(get(r) for r in rows) / len(rows)

    summary = {f"bleu{n}": mean(lambda r, n=n: r[f"bleu{n}"]) for n in range(1, 5)}
    for key in ("rouge1", "rouge2", "rougeL", "token_f1"):
        summary[key] = mean(lambda r, key=key: r[key]["f1"])
    return {"n": len(rows), "mean": summary, "pairs": rows}


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI config file with an [mmkg] section (default: $MMKG_CONFIG)")
    common.add_argument("--jobs", type=int, help="worker thread cap for parallel stages")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    p = _Parser(prog="mmkgqa", description="Multimodal recipe knowledge graph QA toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=fn)
        return sp

    sp = add("build-kg", cmd_build_kg, "Build the graph from recipe CSV, nutrition CSV and image manifest TSV.")
    sp.add_argument("--recipes", required=True, help="CSV with title,ingredients,instructions[,image]")
    sp.add_argument("--nutrition", help="CSV with ingredient,calories,fat,protein,carbohydrates")
    sp.add_argument("--images", help="TSV manifest: entity name <TAB> image path")
    sp.add_argument("--out", help="write the graph here (mmkg triples text format)")
    sp.add_argument("--rejects", help="write rejected recipe rows here as JSON Lines")

    sp = add("stats", cmd_stats, "Entity, relation and image counts of a saved graph.")
    sp.add_argument("--kg", required=True, help="saved graph file")

    sp = add("gen-qa", cmd_gen_qa, "Instantiate question templates into a QA corpus (JSON Lines).")
    sp.add_argument("--kg", required=True, help="saved graph file")
    sp.add_argument("--templates", help="template TSV (default: the 40 shipped templates)")
    sp.add_argument("--augmented", help="JSON Lines of external paraphrased pairs to append")
    sp.add_argument("--limit", type=int, help="max pairs per template")
    sp.add_argument("--out", required=True, help="corpus output path")

    sp = add("refine", cmd_refine, "Dedupe, balance and curate a corpus.")
    sp.add_argument("--in", dest="input", required=True, help="corpus JSON Lines")
    sp.add_argument("--out", required=True, help="refined corpus output path")
    sp.add_argument("--blocklist", help="lines of id:<pair-id> or re:<pattern>")
    sp.add_argument("--log", help="write the curation removal log here as JSON Lines")
    sp.add_argument("--threshold", type=float, help="semantic dedup cosine threshold")
    sp.add_argument("--k", type=int, help="clusters for balancing")
    sp.add_argument("--cap", type=int, help="per-cluster cap; enables balancing")
    sp.add_argument("--seed", type=int, help="K-Means seed")

    sp = add("diversity", cmd_diversity, "Silhouette, Davies-Bouldin and Dunn over question clusters.")
    sp.add_argument("--in", dest="input", required=True, help="corpus JSON Lines")
    sp.add_argument("--k", type=int, help="clusters (default 50)")
    sp.add_argument("--seed", type=int, help="K-Means seed (default 42)")

    sp = add("mismatch", cmd_mismatch, "Image-text mismatch rate over JSON Lines of {text, image}.")
    sp.add_argument("--pairs", required=True, help="JSON Lines; image paths relative to the file")
    sp.add_argument("--threshold", type=float, help="cosine below which a pair is a mismatch")

    sp = add("hallucinate", cmd_hallucinate, "QA-consistency hallucination rate over {id, gt_image, gen_image}.")
    sp.add_argument("--dataset", required=True, help="JSON Lines of image pairs")
    sp.add_argument("--vqa", required=True, help="mock:FIXTURE.json or a vision-QA service URL")
    sp.add_argument("--theta-match", type=float, help="token-F1 for Match")
    sp.add_argument("--theta-halluc", type=float, help="token-F1 below which Hallucination")

    sp = add("route", cmd_route, "Compare retrieval, generation and hybrid image provisioning.")
    sp.add_argument("--queries", required=True, help="JSON Lines of {question, answer[, gt_image]}")
    sp.add_argument("--kg", required=True, help="saved graph file")
    sp.add_argument("--tau", type=float, help="retrieval confidence threshold")
    sp.add_argument("--gen", default="mock", help="'mock' or a generation service URL")
    sp.add_argument("--gen-dir", default="mmkg-generated", help="where the mock generator writes images")
    sp.add_argument("--vqa", help="mock:FIXTURE.json or URL; enables hallucination rates")

    sp = add("answer", cmd_answer, "Answer one question with text and an image.")
    sp.add_argument("--question", required=True, help="question text")
    sp.add_argument("--kg", required=True, help="saved graph file")
    sp.add_argument("--tau", type=float, help="retrieval confidence threshold")
    sp.add_argument("--text", help="text-answer service URL (default: answer from the graph)")
    sp.add_argument("--gen", default="mock", help="'mock' or a generation service URL")
    sp.add_argument("--gen-dir", default="mmkg-generated", help="where the mock generator writes images")

    sp = add("eval-metrics", cmd_eval_metrics, "BLEU-1..4, ROUGE-1/2/L and token F1 over {candidate, reference}.")
    sp.add_argument("--pairs", required=True, help="JSON Lines of candidate/reference texts")
    return p


_OVERRIDES = {
    "jobs": "jobs", "threshold": None, "k": "k", "seed": "seed", "cap": "per_cluster_cap",
    "tau": "tau", "theta_match": "theta_match", "theta_halluc": "theta_halluc",
}


def _settings(args) -> Settings:
    s = load_settings(args.config)
    over = {}
    for flag, key in _OVERRIDES.items():
        if key and getattr(args, flag, None) is not None:
            over[key] = getattr(args, flag)
    if getattr(args, "threshold", None) is not None:
        key = "mismatch_threshold" if args.command == "mismatch" else "dedupe_threshold"
        over[key] = args.threshold
    return s.replace(**over)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        result = args.func(args, _settings(args))
    except StageError as exc:
        log.error("%s", exc)
        return EXIT_INVALID if isinstance(exc.cause, ValidationError) else EXIT_IO
    except ValidationError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except (OSError, TransportError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except MMKGError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    _emit(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
