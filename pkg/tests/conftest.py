"""Shared fixtures: deterministic synthetic CSV files in the layout of the
two application datasets (a diabetes-style binary table and a breast-cancer
style survival table). Generating coefficients echo published effect sizes
so sign patterns are recoverable; the numbers themselves are synthetic.
"""

import csv

import numpy as np
import pytest

FIXTURE_SEED = 20260810


def write_pima_like_csv(path, n=768, seed=FIXTURE_SEED):
    gen = np.random.default_rng(seed)
    pregnant = gen.poisson(3.8, n)
    glucose = np.clip(gen.normal(121, 31, n), 44, 199).round(0)
    pressure = np.clip(gen.normal(69, 19, n), 24, 122).round(0)
    triceps = np.clip(gen.normal(20.5, 16, n), 0, 99).round(0)
    insulin = np.clip(gen.normal(80, 115, n), 0, 846).round(0)
    mass = np.clip(gen.normal(32, 7.9, n), 18.2, 67.1).round(1)
    pedigree = np.clip(gen.gamma(2.3, 0.21, n), 0.078, 2.42).round(3)
    age = np.clip(21 + gen.gamma(1.6, 7.4, n), 21, 81).round(0)
    eta = (-8.5 + 0.105 * pregnant + 0.036 * glucose - 0.013 * pressure
           + 0.004 * triceps - 0.002 * insulin + 0.091 * mass
           + 0.708 * pedigree + 0.017 * age)
    y = gen.random(n) < 1.0 / (1.0 + np.exp(-eta))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pregnant", "glucose", "pressure", "triceps", "insulin",
                    "mass", "pedigree", "age", "diabetes"])
        for i in range(n):
            w.writerow([pregnant[i], int(glucose[i]), int(pressure[i]),
                        int(triceps[i]), int(insulin[i]), mass[i], pedigree[i],
                        int(age[i]), "pos" if y[i] else "neg"])
    return path


def write_gbsg_like_csv(path, n=686, seed=FIXTURE_SEED):
    gen = np.random.default_rng(seed)
    hor_th = np.where(gen.random(n) < 0.36, "yes", "no")
    age = np.clip(gen.normal(53, 10, n), 21, 80).round(0)
    menostat = np.where(age + gen.normal(0, 4, n) > 51, "Post", "Pre")
    tsize = np.clip(gen.gamma(4.5, 6.4, n), 3, 120).round(0)
    tgrade = gen.choice(["I", "II", "III"], n, p=[0.12, 0.64, 0.24])
    pnodes = np.clip(1 + gen.gamma(0.9, 5.0, n).round(0), 1, 51)
    progrec = np.clip(gen.lognormal(3.3, 1.4, n), 0, 2380).round(0)
    estrec = np.clip(gen.lognormal(3.5, 1.3, n), 0, 1144).round(0)
    lp = (-0.35 * (hor_th == "yes") - 0.009 * (age - 53) + 0.004 * (tsize - 29)
          + 0.6 * (tgrade == "II") + 1.05 * (tgrade == "III")
          + 0.12 * np.minimum(pnodes, 20) - 0.0035 * np.minimum(progrec, 300))
    lam0 = np.log(2) / 2100.0  # baseline median around 2100 days
    event_time = gen.exponential(1.0 / (lam0 * np.exp(lp)))
    censor_time = gen.uniform(300, 2800, n)
    time = np.minimum(event_time, censor_time).round(0)
    event = (event_time <= censor_time).astype(int)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["horTh", "age", "menostat", "tsize", "tgrade", "pnodes",
                    "progrec", "estrec", "time", "cens"])
        for i in range(n):
            w.writerow([hor_th[i], int(age[i]), menostat[i], int(tsize[i]),
                        tgrade[i], int(pnodes[i]), int(progrec[i]),
                        int(estrec[i]), int(time[i]), event[i]])
    return path


@pytest.fixture(scope="session")
def pima_like_csv(tmp_path_factory):
    return str(write_pima_like_csv(tmp_path_factory.mktemp("data") / "pima_like.csv"))


@pytest.fixture(scope="session")
def gbsg_like_csv(tmp_path_factory):
    return str(write_gbsg_like_csv(tmp_path_factory.mktemp("data") / "gbsg_like.csv"))
