"""Regenerate the channel fixtures under channels/.

Each fixture is a deterministic channel chosen to pin one behavior:

  clean.json         y1=x1, y2=x2; orthogonal links, capacity [0,1]^2
  degraded_z.json    y1=x1 xor x3, y2=(x1,x2); degraded one-sided channel
  semidet.json       y1=x1 xor x3, y2=x2 xor (x1 and x3); deterministic y2
  hi_in_class.json   no helper input, y1=x2, y2=(x1,x2); the interference
                     inequalities hold for every input distribution
  hi_falsified.json  y1=x3, y2=x2; a uniform input falsifies them
  hi_degenerate.json y1 constant, y2=x1; in class because y1 is dead
"""

from pathlib import Path

from cifc_udc import ChannelSpec, dump_channel

FIXTURES = {
    "clean.json": ((2, 2, 2, 2, 2), lambda x1, x2, x3: (x1, x2)),
    "degraded_z.json": ((2, 2, 2, 2, 4), lambda x1, x2, x3: (x1 ^ x3, x1 * 2 + x2)),
    "semidet.json": ((2, 2, 2, 2, 2), lambda x1, x2, x3: (x1 ^ x3, x2 ^ (x1 & x3))),
    "hi_in_class.json": ((2, 2, 1, 2, 4), lambda x1, x2, x3: (x2, x1 * 2 + x2)),
    "hi_falsified.json": ((2, 2, 2, 2, 2), lambda x1, x2, x3: (x3, x2)),
    "hi_degenerate.json": ((2, 2, 2, 1, 2), lambda x1, x2, x3: (0, x1)),
}


def main() -> None:
    target = Path(__file__).resolve().parents[1] / "channels"
    target.mkdir(exist_ok=True)
    for name, (cards, rule) in FIXTURES.items():
        path = target / name
        path.write_text(dump_channel(ChannelSpec.from_outputs(cards, rule)))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
