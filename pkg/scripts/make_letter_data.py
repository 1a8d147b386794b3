"""Rebuild data/letter-recognition.data from the KEEL copy of the letter set.

The KEEL distribution (shipped inside the ``keel-ds`` wheel) stores the
20000 letter rows as ``f1,...,f16,LETTER``. This script moves the label to
the front, giving the UCI layout ``LETTER,f1,...,f16``, and keeps the row
order of the KEEL file.

    pip download --no-deps -d /tmp/wheels keel-ds
    python scripts/make_letter_data.py /tmp/wheels/keel_ds-*.whl
"""
import argparse
import pathlib
import zipfile

MEMBER = "keel_ds/data/balanced/raw/letter.dat"
DEFAULT_OUT = pathlib.Path(__file__).resolve().parents[1] / "data" / "letter-recognition.data"


def convert(text):
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        *features, label = line.split(",")
        if len(features) != 16:
            raise SystemExit(f"unexpected row: {line!r}")
        out.append(",".join([label.strip()] + [f.strip() for f in features]))
    return "\n".join(out) + "\n"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("wheel", help="path to a keel_ds wheel (or an extracted letter.dat)")
    parser.add_argument("-o", "--output", default=str(DEFAULT_OUT))
    args = parser.parse_args()
    if args.wheel.endswith(".whl"):
        with zipfile.ZipFile(args.wheel) as zf:
            text = zf.read(MEMBER).decode("utf-8")
    else:
        text = pathlib.Path(args.wheel).read_text(encoding="utf-8")
    data = convert(text)
    pathlib.Path(args.output).write_text(data, encoding="utf-8")
    print(f"wrote {data.count(chr(10))} rows to {args.output}")


if __name__ == "__main__":
    main()
