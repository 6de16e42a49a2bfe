#!/usr/bin/env python3
"""Extract the Adult and COMPAS CSV files used by configs/adult.json and
configs/compas.json from a copy of the `responsibly` wheel, which bundles
the original UCI and ProPublica files.

    pip download --no-deps responsibly==0.1.2 -d /tmp/whl
    python3 tools/extract_datasets.py /tmp/whl/responsibly-0.1.2-py3-none-any.whl data/

Adult gets a header row added (the UCI file has none); COMPAS is copied
verbatim. All cleaning happens in the C++ loader.
"""
import sys
import zipfile
from pathlib import Path

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__)
        return 2
    wheel, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(wheel) as z:
        adult = z.read("responsibly/dataset/adult/adult.data").decode()
        lines = [ln for ln in adult.splitlines() if ln.strip()]
        (out / "adult.csv").write_text(",".join(ADULT_COLUMNS) + "\n" + "\n".join(lines) + "\n")
        (out / "compas-scores-two-years.csv").write_bytes(
            z.read("responsibly/dataset/compas/compas-scores-two-years.csv"))
    print(f"wrote {out / 'adult.csv'} and {out / 'compas-scores-two-years.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
