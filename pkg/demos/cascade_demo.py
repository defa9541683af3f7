"""Simulate one cascade per class and compare estimates with the truth.

Each hashtag spreads over the same random follower graph.  The estimated
seeder fraction, follower adoption fraction and activity span are printed
next to the values known from the simulation.

    python3 demos/cascade_demo.py [--beta 0.02] [--seed N]
"""

import argparse

import numpy as np

from hashtag_dynamics.diffusion import estimate
from hashtag_dynamics.mixture import ClassLabel
from hashtag_dynamics.synthcascade import CascadeConfig, class_profile, gen_cascade, gen_graph


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--beta", type=float, default=0.02)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--nodes", type=int, default=20000)
    args = ap.parse_args()

    seeds = np.random.SeedSequence(args.seed).spawn(5)
    graph = gen_graph(args.nodes, 10, seeds[0])
    print(f"graph: {len(graph)} users, {graph.n_edges} follow edges\n")
    print(f"{'hashtag':10s} {'class':10s} {'users':>6s} {'RT':>6s} "
          f"{'gamma':>6s} {'true':>6s} {'beta':>7s} {'tau h':>7s}")
    for label, ss in zip(ClassLabel, seeds[1:]):
        tag = str(label).lower()
        cfg = CascadeConfig(tag, label, class_profile(label, 150), beta=args.beta,
                            repeat_rate=0.2, jitter_hours=12.0)
        tweets, truth = gen_cascade(graph, cfg, ss)
        est = estimate(graph, tweets, tag, label)
        print(f"{tag:10s} {str(label):10s} {est.n_users:6d} {est.retweet_fraction:6.3f} "
              f"{est.gamma:6.3f} {truth.seeder_fraction:6.3f} {est.beta:7.4f} {est.tau_hours:7.1f}")
    print(f"\ntransmission probability used in the simulation: {args.beta}")


if __name__ == "__main__":
    main()
