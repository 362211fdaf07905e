"""Command-line front end.

Every subcommand writes JSON (default) or CSV to stdout, or to ``--out``.
All randomness comes from ``--seed``; identical flags give identical bytes.
Exit codes: 0 success, 1 validation failure, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import coalescent, combinatorics, esf, eve, finite, gem, neutrality, order_stats, validation


def _num(x, exact: bool = False):
    if isinstance(x, esf.ExactProbability):
        x = x.value
    if isinstance(x, Fraction):
        return str(x) if exact else float(x)
    if isinstance(x, np.generic):
        return x.item()
    return x


def _key(p: esf.AllelicPartition) -> str:
    return ",".join(map(str, p.counts))


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


class Table:
    """Tabular result: JSON as a list of row objects, CSV as header plus rows."""

    def __init__(self, header, rows):
        self.header = list(header)
        self.rows = [list(r) for r in rows]


def _render(result, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if isinstance(result, Table):
            writer.writerow(result.header)
            writer.writerows(result.rows)
        elif isinstance(result, dict):
            writer.writerow(["key", "value"])
            writer.writerows([k, json.dumps(v, separators=(",", ":")) if isinstance(v, (dict, list)) else v]
                             for k, v in result.items())
        else:
            writer.writerow([result])
        return buf.getvalue()
    if isinstance(result, Table):
        result = [dict(zip(result.header, r)) for r in result.rows]
    return json.dumps(result, separators=(",", ":")) + "\n"


# --- subcommands -------------------------------------------------------------

def cmd_esf(a):
    if a.partition is not None:
        p = esf.AllelicPartition(tuple(a.partition))
        return {"partition": _key(p), "probability": _num(esf.esf_probability(p, a.theta), a.exact)}
    n = a.n
    rows = [(_key(p), _num(esf.esf_probability(p, a.theta), a.exact)) for p in esf.partitions(n)]
    return Table(["partition", "probability"], rows) if a.format == "csv" else dict(rows)


def cmd_k_dist(a):
    return {str(k): _num(v, a.exact) for k, v in esf.k_distribution(a.n, a.theta).items()}


def cmd_age_dist(a):
    if a.counts is not None:
        return {"counts": a.counts, "probability": _num(gem.age_ordered_sample_probability(a.counts, a.theta), a.exact)}
    rows = [(",".join(map(str, c)), _num(gem.age_ordered_sample_probability(c, a.theta), a.exact))
            for c in gem.compositions(a.n, a.k)]
    return Table(["counts", "probability"], rows) if a.format == "csv" else dict(rows)


def cmd_oldest(a):
    if a.population:
        dist = gem.population_oldest_in_sample_distribution(a.n, a.theta)
    else:
        dist = gem.oldest_sample_count_distribution(a.n, a.theta)
    return {str(j): _num(v, a.exact) for j, v in dist.items()}


def cmd_gem_sample(a):
    s = gem.sample_gem(a.theta, a.epsilon, a.seed)
    if a.format == "csv":
        return Table(["index", "weight"], enumerate(s.weights.tolist(), 1))
    return {"weights": s.weights.tolist(), "residual": s.residual, "seed": a.seed}


def cmd_order_stats(a):
    out = {"theta": str(a.theta), "bounds": list(order_stats.mean_largest_bounds(a.theta))}
    if a.threshold is not None:
        out["tail"] = order_stats.tail_probability(a.threshold, a.theta)
    if a.replicates:
        est = order_stats.estimate_mean_order_statistic(a.rank, a.theta, a.replicates, a.seed, a.epsilon)
        out.update(rank=a.rank, estimate=est.estimate, std_error=est.std_error, flagged=est.flagged)
    return out


def cmd_coalescent(a):
    batch = coalescent.simulate_ima(a.n, a.theta, a.replicates, a.seed)
    if a.summary:
        return {
            "n": a.n, "replicates": a.replicates, "seed": a.seed,
            "mean_k": float(batch.k.mean()), "mean_t_mrcas": float(batch.t_mrcas.mean()),
            "mean_x_n": float(batch.x_n.mean()), "mean_y_n": float(batch.y_n.mean()),
        }
    rows = [(i, _key(esf.AllelicPartition(tuple(int(c) for c in batch.partitions[i]))), int(batch.k[i]),
             float(batch.t_mrcas[i]), int(batch.x_n[i]), int(batch.y_n[i])) for i in range(a.replicates)]
    return Table(["replicate", "partition", "k", "t_mrcas", "x_n", "y_n"], rows)


def cmd_eve(a):
    d = eve.solve_eve_recurrence(a.n, a.theta)
    lo, hi = eve.eve_extinction_bounds(a.theta)
    return {"q": {str(j): _num(v, a.exact) for j, v in enumerate(d.q)}, "mean": _num(d.mean(), a.exact),
            "extinction_bounds": [lo, hi]}


def cmd_moran(a):
    if (a.u is None) == (a.theta is None):
        raise ValueError("give exactly one of --u and --theta")
    u = float(a.u) if a.u is not None else float(finite.moran_u_for_theta(a.N, a.theta))
    run = finite.moran_stationary_samples(a.N, u, a.samples, a.seed, exclude_self=a.exclude_self)
    counts = sorted(run.partition_counts().items(), key=lambda kv: kv[0].counts[::-1])
    freqs = {_key(p): c / a.samples for p, c in counts}
    if a.format == "csv":
        return Table(["partition", "frequency"], freqs.items())
    return {"u": u, "theta": float(finite.moran_theta(a.N, u)), "partition_frequencies": freqs,
            "same_type_pair": float(run.same_type_pairs.mean())}


def cmd_hoppe(a):
    counts = finite.hoppe_age_counts_batch(a.N, a.theta, a.replicates, a.seed)
    n1 = counts[:, 0]
    m = 2 * a.N
    return {"mean_oldest_count": float(n1.mean()), "expected_oldest_count": _num(finite.mean_oldest_count(a.N, a.theta)),
            "monomorphic": float((n1 == m).mean()), "expected_monomorphic": _num(finite.monomorphism_exact(a.N, a.theta)),
            "mean_k": float((counts > 0).sum(axis=1).mean())}


def cmd_ages(a):
    out = {"oldest": finite.mean_age_oldest(a.N, a.theta)}
    if a.p is not None:
        out["given_frequency"] = finite.mean_age_given_frequency(a.N, a.theta, a.p)
    if a.n is not None:
        out["oldest_in_sample"] = finite.mean_age_oldest_in_sample(a.N, a.n, a.theta)
    return out


def cmd_charge_state(a):
    trace = finite.run_charge_state(a.N, a.u, a.generations, a.seed)
    if a.format == "csv":
        return Table(["generation", "spread", "occupied"],
                     zip(range(1, a.generations + 1), trace.spread.tolist(), trace.occupied.tolist()))
    return {"max_spread": int(trace.spread.max()), "spread_p99": float(np.percentile(trace.spread, 99)),
            "mean_occupied": float(trace.occupied.mean()), "final_occupied": int(trace.occupied[-1])}


def cmd_lambda(a):
    if (a.two_n is None) == (a.two_n_exponent is None):
        raise ValueError("give exactly one of --two-n and --two-n-exponent")
    if a.two_n_exponent is not None:
        return finite.kesten_lambda(exponent=a.two_n_exponent)
    return finite.kesten_lambda(a.two_n)


def _largest(a, sampler, exact_tail=None):
    if a.samples == 1:
        one = (combinatorics.random_permutation_cycle_type if sampler is combinatorics.permutation_longest_cycles
               else combinatorics.random_mapping_component_sizes)(a.n, a.seed)
        return {"counts": list(one.counts)}
    s = sampler(a.n, a.samples, a.seed)
    mean, mean_se = s.normalized_mean()
    tail, tail_se = s.tail()
    out = {"n": a.n, "samples": a.samples, "mean_largest": mean, "mean_largest_se": mean_se,
           "tail_half": tail, "tail_half_se": tail_se}
    if exact_tail is not None:
        out["exact_tail_half"] = exact_tail
    return out


def cmd_perm(a):
    return _largest(a, combinatorics.permutation_longest_cycles, float(combinatorics.longest_cycle_exact_tail(a.n)))


def cmd_mapping(a):
    return _largest(a, combinatorics.mapping_largest_components)


def cmd_neutrality(a):
    if (a.partition is None) == (a.sizes is None):
        raise ValueError("give exactly one of --partition and --sizes")
    p = esf.AllelicPartition(tuple(a.partition)) if a.partition else esf.AllelicPartition.from_sizes(a.sizes)
    return json.loads(neutrality.neutrality_test(p, a.replicates, a.seed).to_json())


def cmd_table(a):
    most, oldest = [], []
    for i, t in enumerate(validation.TABLE_THETAS):
        most.append(order_stats.estimate_mean_order_statistic(1, float(t), a.replicates, a.seed + i).estimate)
        oldest.append(_num(gem.mean_jth_oldest(1, t), a.exact))
    header = ["row"] + list(validation.TABLE_THETAS)
    return Table(header, [["most_frequent"] + most, ["oldest"] + oldest])


def cmd_validate(a):
    results = validation.run_all(lambda line: print(line, file=sys.stderr, flush=True))
    failed = [r.number for r in results if not r.passed]
    return {"passed": not failed, "failed": failed,
            "criteria": {str(r.number): {"name": r.name, "passed": r.passed} for r in results}}


# --- parser ------------------------------------------------------------------

def _theta(text: str):
    try:
        return esf.as_theta(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--exact", action="store_true", help="print exact rationals as 'p/q' strings")

    parser = argparse.ArgumentParser(prog="esfkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("esf", cmd_esf, "sampling-formula probabilities")
    p.add_argument("--n", type=int)
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--partition", type=_int_list, help="allele counts a1,a2,...,an")

    p = add("k-dist", cmd_k_dist, "law of the number of alleles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=_theta, required=True)

    p = add("age-dist", cmd_age_dist, "age-ordered sample probabilities")
    p.add_argument("--counts", type=_int_list, help="allele counts, oldest first")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--theta", type=_theta, required=True)

    p = add("oldest", cmd_oldest, "law of the oldest allele's sample count")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--population", action="store_true", help="oldest allele of the population (count may be 0)")

    p = add("gem-sample", cmd_gem_sample, "one stick-breaking draw")
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--epsilon", type=float, default=gem.DEFAULT_EPSILON)

    p = add("order-stats", cmd_order_stats, "largest-frequency bounds, tails and Monte Carlo means")
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--replicates", type=int, default=0)
    p.add_argument("--threshold", type=float)
    p.add_argument("--epsilon", type=float, default=gem.DEFAULT_EPSILON)

    p = add("coalescent", cmd_coalescent, "coalescent replicates with mutation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--summary", action="store_true")

    p = add("eve", cmd_eve, "law of the count of Eve's allele")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=_theta, required=True)

    p = add("moran", cmd_moran, "stationary Moran population snapshots")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--u", type=str)
    p.add_argument("--theta", type=_theta)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--exclude-self", action="store_true")

    p = add("hoppe", cmd_hoppe, "age-ordered population counts")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--replicates", type=int, default=10_000)

    p = add("ages", cmd_ages, "mean allele ages in generations")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--theta", type=_theta, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--n", type=int)

    p = add("charge-state", cmd_charge_state, "one-dimensional charge-state model")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--generations", type=int, default=1000)

    p = add("lambda", cmd_lambda, "iterated-exponential index of 2N")
    p.add_argument("--two-n", help="2N as an integer or '10^E'")
    p.add_argument("--two-n-exponent", type=int)

    for name, fn, what in (("perm", cmd_perm, "random permutation cycles"),
                           ("mapping", cmd_mapping, "random mapping components")):
        p = add(name, fn, what)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--samples", type=int, default=1)

    p = add("neutrality", cmd_neutrality, "homozygosity test")
    p.add_argument("--partition", type=_int_list)
    p.add_argument("--sizes", type=_int_list, help="allele sizes, e.g. 4,3,3")
    p.add_argument("--replicates", type=int, default=10_000)

    p = add("table-3-1", cmd_table, "mean largest and oldest population frequencies")
    p.add_argument("--replicates", type=int, default=100_000)

    add("validate", cmd_validate, "run every acceptance check")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "esf" and args.partition is None and args.n is None:
            raise ValueError("give --n or --partition")
        if args.command == "age-dist" and args.counts is None and args.n is None:
            raise ValueError("give --n or --counts")
        result = args.func(args)
    except (ValueError, TypeError) as exc:
        print(f"esfkit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = _render(result, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "validate" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
