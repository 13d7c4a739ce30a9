"""Train the dialogue-act CRF on the synthetic corpus and compare with the majority tag.

    python scripts/run_crf_synthetic.py [--conversations 500] [--seed 0]
"""
from __future__ import annotations

import argparse
import time
from collections import Counter

from dialsumm import crf
from dialsumm.crf import FeatureConfig
from dialsumm.synthetic import DA_TAGSET, generate_da_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--conversations", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--l2", type=float, default=0.1)
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--speaker-change", action="store_true", help="add the speaker-change feature")
    args = ap.parse_args()

    convs = generate_da_corpus(args.conversations, seed=args.seed)
    n_train, n_dev = int(0.7 * len(convs)), int(0.1 * len(convs))
    train, dev, test = convs[:n_train], convs[n_train:n_train + n_dev], convs[n_train + n_dev:]
    start = time.perf_counter()
    model = crf.train(train, dev, crf.TrainConfig(l2_lambda=args.l2, epochs=args.epochs, seed=args.seed),
                      DA_TAGSET, FeatureConfig(speaker_change=args.speaker_change))
    elapsed = time.perf_counter() - start

    majority, _ = Counter(t for c in train for t in c.tags).most_common(1)[0]
    gold = [t for c in test for t in c.tags]
    baseline = sum(t == majority for t in gold) / len(gold)
    acc = crf.evaluate_accuracy(model, test)
    print(f"train/dev/test conversations: {len(train)}/{len(dev)}/{len(test)}")
    print(f"features: {len(model.features)}, training time {elapsed:.1f}s")
    print(f"test accuracy      {acc:.4f}")
    print(f"majority ('{majority}')  {baseline:.4f}")


if __name__ == "__main__":
    main()
