import argparse
import sys

from .errors import BridgeError
from .job import BridgeJob, encode_directory


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gvf-bridge",
        description="Encode a directory of .gvf graph videos into a .gve "
                    "embedding file with a frozen video backbone.")
    parser.add_argument("--input-dir", required=True,
                        help="directory of .gvf files")
    parser.add_argument("--out", required=True, help="output .gve path")
    parser.add_argument("--model", default="standin/vit-tiny")
    parser.add_argument("--pooling", choices=["mean", "cls"], default="mean")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    job = BridgeJob(input_dir=args.input_dir, output_path=args.out,
                    model=args.model, pooling=args.pooling,
                    batch_size=args.batch_size, device=args.device)
    try:
        manifest = encode_directory(job)
    except (BridgeError, ValueError) as exc:
        print(f"error:{type(exc).__name__}:{exc}", file=sys.stderr)
        return 1
    print(f"encoded {manifest['count']} videos (d_vid={manifest['d_vid']}) "
          f"-> {args.out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
