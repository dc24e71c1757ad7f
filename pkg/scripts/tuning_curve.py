"""Signal and idler emission angles over a wavelength band for both pump-angle rules."""

import argparse

from twinphoton.phasematch import PUMP_ANGLE_RULES, default_crystal, tuning_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--psi", type=float, default=29.3)
    ap.add_argument("--from-nm", type=float, default=700.0)
    ap.add_argument("--to-nm", type=float, default=950.0)
    ap.add_argument("--steps", type=int, default=26)
    args = ap.parse_args()

    curves = {
        rule: tuning_curve(args.from_nm, args.to_nm, args.steps,
                           default_crystal(cut_angle_psi=args.psi, pump_angle_rule=rule))
        for rule in PUMP_ANGLE_RULES
    }
    print("lambda_s  lambda_i  " + "  ".join(f"{r:>22}" for r in PUMP_ANGLE_RULES))
    for k, p in enumerate(curves[PUMP_ANGLE_RULES[0]]):
        cols = []
        for rule in PUMP_ANGLE_RULES:
            q = curves[rule][k]
            cols.append(f"{q.theta_signal_out:10.4f} {q.theta_idler_out:10.4f}  ")
        print(f"{p.lambda_signal:8.1f}  {p.lambda_idler:8.1f}  " + "  ".join(cols))
    for rule, pts in curves.items():
        best = min((p for p in pts if p.phase_matched), key=lambda p: p.theta_signal_out)
        print(f"{rule}: narrowest signal cone {best.theta_signal_out:.4f} deg at {best.lambda_signal:.1f} nm")


if __name__ == "__main__":
    main()
