"""Zero-field contrast against RF frequency, compared with the product of per-flip Rabi probabilities."""
import argparse

import numpy as np

from polarimeter.elements import RFFlipper, rabi_flip_probability
from polarimeter.experiment import NOMINAL_BEAM
from polarimeter.figures import RESONANCE_FREQUENCY, scenario, figure_scan, fit_scan
from polarimeter.spinor import DEFAULT_CONSTANTS


def rabi_product(f_hz, polarization):
    bl, _, _ = scenario("fig3", f_hz, NOMINAL_BEAM, 0.02, polarization, DEFAULT_CONSTANTS)
    v = bl.velocity
    return float(np.prod([rabi_flip_probability(e.rabi_rate(v), e.detuning(bl.guide_field), e.duration(v))
                          for e in bl.of_type(RFFlipper)]))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--engine", choices=("analytic", "oracle"), default="analytic")
    parser.add_argument("--rf-polarization", choices=("linear", "rotating"), default="rotating")
    args = parser.parse_args(argv)
    ref = fit_scan(figure_scan("fig3", RESONANCE_FREQUENCY, engine=args.engine,
                               rf_polarization=args.rf_polarization)).contrast
    print("f_kHz,contrast_ratio,rabi_product")
    for f in np.arange(28.8e3, 31.81e3, 0.3e3):
        c = fit_scan(figure_scan("fig3", f, engine=args.engine, rf_polarization=args.rf_polarization)).contrast
        print(f"{f / 1e3:.1f},{c / ref:.6f},{rabi_product(f, args.rf_polarization):.6f}")


if __name__ == "__main__":
    main()
