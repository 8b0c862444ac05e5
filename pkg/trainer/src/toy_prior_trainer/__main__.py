"""CLI: train the tiny predictor and export weights plus parity vectors.

    python -m toy_prior_trainer --out weights.teps --parity parity.json \
        --size 32 --count 20000 --epochs 8 --seed 7
"""

import argparse

from .dataset import ToyDatasetSpec, generate_toy_dataset
from .export import export_weights, write_parity_vectors
from .train import train_toy_ddpm


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="toy_prior_trainer")
    parser.add_argument("--out", required=True, help="output weights container (.teps)")
    parser.add_argument("--parity", required=True, help="output parity-vector JSON")
    parser.add_argument("--size", type=int, default=32)
    parser.add_argument("--count", type=int, default=20000)
    parser.add_argument("--epochs", type=int, default=8)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--feature-width", type=int, default=32)
    parser.add_argument("--shape-fraction", type=float, default=0.5)
    args = parser.parse_args(argv)

    spec = ToyDatasetSpec(
        count=args.count, size=args.size, shape_fraction=args.shape_fraction, seed=args.seed
    )
    print(f"generating {args.count} toy images ({args.size}x{args.size})...")
    images = generate_toy_dataset(spec)
    print(f"training for {args.epochs} epochs (seed {args.seed})...")
    result = train_toy_ddpm(images, epochs=args.epochs, seed=args.seed, feature_width=args.feature_width)
    print(f"final noise-prediction MSE: {result.final_mse:.4f} (zero-predictor floor: 1.0)")
    export_weights(result.model, args.out, provenance=result.provenance)
    write_parity_vectors(result.model, args.parity)
    print(f"wrote {args.out} and {args.parity}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
