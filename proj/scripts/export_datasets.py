"""Write the bundled scikit-learn copies of Iris, Wine and Breast cancer as plain CSVs."""
import csv
import pathlib

from sklearn import datasets

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def write(name, bunch):
    names = [str(n).replace(" ", "_") for n in bunch.feature_names]
    classes = [str(c) for c in bunch.target_names]
    with open(OUT / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["class"])
        for row, label in zip(bunch.data, bunch.target):
            w.writerow([repr(float(v)) for v in row] + [classes[label]])


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    write("iris", datasets.load_iris())
    write("wine", datasets.load_wine())
    write("breast_cancer", datasets.load_breast_cancer())
