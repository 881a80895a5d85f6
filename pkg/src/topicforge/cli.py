"""Command-line entry point wiring all the pieces together.

Exit codes: 0 success, 1 usage error, 2 data error. Every randomized
subcommand takes a seed (defaulted, echoed in its output), so identical
inputs and seeds give byte-identical outputs.
"""

import json
import sys

import click

from . import __version__
from .errors import TopicForgeError

SEED_DEFAULT = 42


@click.group(name="topicforge", no_args_is_help=False)
@click.version_option(__version__)
def cli():
    """Topical corpus construction and human-in-the-loop sentence labeling."""


def _echo_json(obj):
    click.echo(json.dumps(obj, ensure_ascii=False, sort_keys=True))


# -- link graph ------------------------------------------------------------------


@cli.command("build-index")
@click.option("--edges", "edges_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON summary.")
def build_index_cmd(edges_path, out_path, as_json):
    """Build a binary link index from a TSV edge file."""
    from .linkindex import build_index_from_file, save_index

    index = build_index_from_file(edges_path)
    save_index(index, out_path)
    links = sum(len(index.outlink_ids(i)) for i in range(len(index)))
    if as_json:
        _echo_json({"articles": index.total_articles, "links": links, "path": out_path})
    else:
        click.echo(f"{index.total_articles} articles, {links} links -> {out_path}")


@cli.command("inlinks")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--title", required=True)
def inlinks_cmd(index_path, title):
    """Print the titles linking to TITLE, one per line (sorted)."""
    from .linkindex import load_index

    for t in sorted(load_index(index_path).inlinks(title)):
        click.echo(t)


@cli.command("ngd")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--a", "title_a", required=True)
@click.option("--b", "title_b", required=True)
def ngd_cmd(index_path, title_a, title_b):
    """Print the relatedness score of two titles (6 decimals, or 'unrelated')."""
    from .linkindex import load_index
    from .ngd import UNRELATED, ngd

    score = ngd(load_index(index_path), title_a, title_b)
    click.echo("unrelated" if score is UNRELATED else f"{score:.6f}")


@cli.command("traverse")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", "seed_title", required=True, help="Seed article title.")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--iters", type=int, default=2, show_default=True)
@click.option("--out", "out_path", required=True, help="Output TSV path, or - for stdout.")
def traverse_cmd(index_path, seed_title, threshold, iters, out_path):
    """Collect articles related to a seed; TSV columns title, score, hop."""
    from .linkindex import load_index
    from .ngd import rank_candidates, traverse

    result = traverse(load_index(index_path), seed_title, threshold, iters)
    rows = [f"{title}\t{score:.6f}\t{hop}\n" for title, score, hop in rank_candidates(result)]
    if out_path == "-":
        click.echo("".join(rows), nl=False)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.writelines(rows)
        click.echo(f"{len(rows)} articles -> {out_path}")


# -- corpus ------------------------------------------------------------------------


@cli.command("sample")
@click.option("--mode", type=click.Choice(["balanced", "by-prediction"]), required=True)
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--n", "n_per_class", type=int, required=True, help="Records per class.")
@click.option("--seed", type=int, default=SEED_DEFAULT, show_default=True)
@click.option("--predictions", "pred_path", type=click.Path(exists=True, dir_okay=False),
              help="JSONL of {id, label} rows (required for by-prediction).")
def sample_cmd(mode, in_path, out_path, n_per_class, seed, pred_path):
    """Draw a balanced or prediction-based sentence sample."""
    from .corpus import prediction_based_sample, read_records, sample_balanced, write_records

    records = read_records(in_path)
    if mode == "balanced":
        sampled = sample_balanced(records, n_per_class, seed)
    else:
        if not pred_path:
            raise click.UsageError("--predictions is required with --mode by-prediction")
        predictions = {}
        with open(pred_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    obj = json.loads(line)
                    predictions[str(obj["id"])] = obj["label"]
        sampled = prediction_based_sample(records, predictions, n_per_class, seed)
    write_records(sampled, out_path)
    _echo_json({"mode": mode, "seed": seed, "sampled": len(sampled), "path": out_path})


@cli.command("consensus")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
def consensus_cmd(in_path, out_path):
    """Consensus-label records that carry rater labels."""
    from .corpus import apply_consensus, read_records, write_records

    labeled = apply_consensus(read_records(in_path))
    write_records(labeled, out_path)
    positives = sum(1 for r in labeled if r.label == "positive")
    _echo_json({"records": len(labeled), "positive": positives,
                "negative": len(labeled) - positives, "path": out_path})


@cli.command("classify-keywords")
@click.option("--glossary", "glossary_spec", required=True,
              help="Glossary file, or several separated by commas.")
@click.option("--union", "union_flag", is_flag=True, help="Union multiple glossaries.")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
def classify_keywords_cmd(glossary_spec, union_flag, in_path, out_path):
    """Label sentences by whole-word glossary matching; writes {id,label} JSONL."""
    from .corpus import read_records
    from .keywords import classify_keywords, load_glossary, union_glossaries

    paths = [p for p in glossary_spec.split(",") if p]
    glossaries = [load_glossary(p) for p in paths]
    if len(glossaries) > 1 and not union_flag:
        raise click.UsageError("multiple glossaries require --union")
    glossary = glossaries[0] if len(glossaries) == 1 else union_glossaries(glossaries)
    n_pos = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for rec in read_records(in_path):
            label = classify_keywords(rec.text, glossary)
            n_pos += label == "positive"
            fh.write(json.dumps({"id": rec.id, "label": label}, ensure_ascii=False) + "\n")
    _echo_json({"glossary_size": len(glossary), "positive": n_pos, "path": out_path})


# -- models -------------------------------------------------------------------------


@cli.command("train-nb")
@click.option("--labeled", "labeled_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--features", "features_path", type=click.Path(exists=True, dir_okay=False),
              help="TSV of feature<TAB>class oracle assertions.")
@click.option("--unlabeled", "unlabeled_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--em", "em_pass", is_flag=True, help="One semi-supervised pass over --unlabeled.")
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--boost", type=float, default=50.0, show_default=True)
@click.option("--unigrams-only", is_flag=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
def train_nb_cmd(labeled_path, features_path, unlabeled_path, em_pass, alpha, boost,
                 unigrams_only, out_path):
    """Train the Naive Bayes sentence classifier and save it as JSON."""
    from .active import read_feature_labels
    from .corpus import read_records
    from .nb import NbConfig, save_model, train

    labeled = [r for r in read_records(labeled_path) if r.label is not None]
    feature_labels = read_feature_labels(features_path) if features_path else []
    unlabeled = [r.text for r in read_records(unlabeled_path)] if unlabeled_path else []
    config = NbConfig(alpha=alpha, boost=boost, bigrams=not unigrams_only, em_pass=em_pass)
    model = train(labeled, feature_labels, unlabeled, config, classes=("negative", "positive"))
    save_model(model, out_path)
    _echo_json({
        "labeled": len(labeled),
        "labeled_features": len(feature_labels),
        "unlabeled": len(unlabeled),
        "vocabulary": len(model.vocabulary),
        "path": out_path,
    })


@cli.command("al-serve")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--port", type=int, default=8030, show_default=True)
@click.option("--data-dir", "data_dir", default=None,
              help="Session storage root (default: $TOPIC_FORGE_DATA_DIR or ./topicforge-data).")
def al_serve_cmd(corpus_path, port, data_dir):
    """Serve the labeling-session HTTP API over CORPUS."""
    from .corpus import read_records
    from .service import default_data_dir, serve_forever

    records = read_records(corpus_path)
    data_dir = data_dir or default_data_dir()
    click.echo(f"serving {len(records)} sentences on port {port}, sessions in {data_dir}")
    serve_forever(port, data_dir, records)


# -- evaluation -----------------------------------------------------------------------


def _read_labeled_rows(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                rows.append((str(obj["id"]) if "id" in obj else None, obj["label"]))
    return rows


@cli.command("evaluate")
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bootstrap", "n_bootstrap", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=SEED_DEFAULT, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def evaluate_cmd(pred_path, gold_path, n_bootstrap, seed, as_json):
    """Bootstrap accuracy/precision/recall/F1 of predictions against gold labels."""
    from .errors import EvaluationError
    from .evaluation import bootstrap_metrics, report_json

    pred_rows = _read_labeled_rows(pred_path)
    gold_rows = _read_labeled_rows(gold_path)
    if len(pred_rows) != len(gold_rows):
        shorter = pred_path if len(pred_rows) < len(gold_rows) else gold_path
        raise EvaluationError(
            f"prediction/gold length mismatch ({len(pred_rows)} vs {len(gold_rows)}): "
            f"{shorter} is shorter"
        )
    for i, ((pid, _), (gid, _)) in enumerate(zip(pred_rows, gold_rows), start=1):
        if pid is not None and gid is not None and pid != gid:
            raise EvaluationError(f"id mismatch at line {i}: {pid!r} vs {gid!r}")
    report = bootstrap_metrics(
        [label for _, label in pred_rows],
        [label for _, label in gold_rows],
        n_bootstrap=n_bootstrap,
        seed=seed,
    )
    click.echo(report_json(report) if as_json else report.to_table())


@cli.command("kappa")
@click.option("--ratings", "ratings_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def kappa_cmd(ratings_path, as_json):
    """Fleiss' kappa from a CSV of per-item rater counts per category."""
    from .evaluation import fleiss_kappa, read_rating_csv, report_json

    report = fleiss_kappa(read_rating_csv(ratings_path))
    if as_json:
        click.echo(report_json(report))
    else:
        click.echo(f"kappa: {report.kappa:.4f}")
        click.echo(f"agreement: {report.agreement_level}")
        click.echo(f"items: {report.n_items}, raters per item: {report.n_raters}")


# -- entry point -------------------------------------------------------------------------


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:  # --help / --version
        return exc.exit_code
    except click.UsageError as exc:
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except (TopicForgeError, FileNotFoundError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
