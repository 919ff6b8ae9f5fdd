"""Monte-Carlo coverage of the fitted k interval for Poisson-noised Larmor scans."""
import argparse

from polarimeter.experiment import GAUSS, Configuration, ScanSpec, run_scan
from polarimeter.figures import fit_scan
from polarimeter.spinor import larmor_frequency


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=200)
    parser.add_argument("--counts", type=int, default=1000)
    args = parser.parse_args(argv)
    k_true = 2 * larmor_frequency(10.79 * GAUSS) / 1990.0
    pulls = []
    for seed in range(args.seeds):
        fit = fit_scan(run_scan(ScanSpec(Configuration.LARMOR, counts_per_point=args.counts, rng_seed=seed)))
        pulls.append((fit.k - k_true) / fit.k_err)
    inside = sum(abs(p) <= 1.96 for p in pulls) / len(pulls)
    mean = sum(pulls) / len(pulls)
    rms = (sum(p * p for p in pulls) / len(pulls)) ** 0.5
    print(f"seeds={args.seeds} coverage(1.96 sigma)={inside:.3f} pull mean={mean:+.3f} rms={rms:.3f}")


if __name__ == "__main__":
    main()
