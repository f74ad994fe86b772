"""Regenerate ``src/renorm_nbody/data/verner98e.txt``.

Seeds Verner's 16-stage "efficient" 9(8) pair (RKV98.IIa, 2024 revision) from
its published double-precision coefficients, then refines every nonzero
coefficient by Gauss-Newton on the full set of order conditions (486 trees
for the order-9 weights, 200 for the order-8 weights) plus the short-decimal
nodes, until all residuals are below 1e-45 at 60 significant digits.
The sparsity pattern of the seed is kept fixed.

Run from the repository root::

    python tools/refine_verner98.py
"""
import sys
from pathlib import Path

import mpmath
import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from renorm_nbody.tableau import format_tableau, order_residuals, parse_tableau  # noqa: E402

S = 16
ORDER, ORDER_HAT = 9, 8
DIGITS = 50
mpmath.mp.dps = 60

SEED_A = {
    1: {0: '0.3571e-1'},
    2: {0: '-3.833735636677017e-2', 1: '0.13739763727944432'},
    3: {0: '3.71476053422528e-2', 2: '0.11144281602675842'},
    4: {0: '2.674764429871505', 2: '-9.982382134885293', 3: '7.921017705013789'},
    5: {0: '5.242104050577351e-2', 3: '0.17969111891759532', 4: '6.237879371938568e-4'},
    6: {0: '0.15924922236476322', 3: '-0.4298429877241087', 4: '6.665266542726088e-2', 5: '0.757805152571522'},
    7: {0: '7.283333333333333e-2', 5: '0.33593445906651037', 6: '0.2467322076001563'},
    8: {0: '7.29755859375e-2', 5: '0.33480097296993333', 6: '0.11841582390506665', 7: '-3.45673828125e-2'},
    9: {0: '4.9112136634520964e-2', 5: '3.983857361308652e-2', 6: '0.10696752889393549', 7: '-2.1742591654586477e-2', 8: '-0.10559564748695649'},
    10: {0: '-2.7079888186412805e-2', 5: '3.33e-2', 6: '-0.16455260700360572', 7: '3.42826630649739e-2', 8: '0.1585264064439221', 9: '0.2185234256811225'},
    11: {0: '5.5846577691088625e-2', 5: '9.166533166672539e-2', 6: '0.2392399655523627', 7: '1.023834712248415e-2', 8: '-2.6793313228595426e-3', 9: '4.2356241814742845e-2', 10: '0.2253970470166604'},
    12: {0: '-0.4802510512725196', 5: '-6.3596101625559305', 6: '-0.2762313898040841', 7: '-6.500796633979847', 8: '0.5734765877040957', 9: '1.3471259948681389', 10: '5.936840409706221', 11: '6.590346245333925'},
    13: {0: '0.3307533067671401', 5: '5.956207776829962', 6: '-0.48683164004815277', 7: '4.462055288206771', 8: '0.7410258231442072', 9: '-0.7118192034575913', 10: '-5.454619594516665', 11: '-4.14080372924471', 12: '0.20383197231903866'},
    14: {0: '-0.5847111122998945', 5: '-12.41268417116267', 6: '1.360245445660928', 7: '-22.426105311118683', 8: '-0.8828857055865458', 9: '1.7701551285382304', 10: '12.158096519185339', 11: '22.230375204077607', 12: '-0.6634483760201249', 13: '0.45096237872581374'},
    15: {0: '1.9405755498106487', 5: '21.977984081145564', 6: '0.8230747326984729', 7: '68.16441683626354', 8: '-3.117097463620267', 9: '-4.56884102182244', 10: '-18.74190987126265', 11: '-66.57711839637832', 12: '1.0989155531654418'},
}
SEED_B = {0: '1.5006690149797247e-2', 7: '-1.0551809927463813', 8: '0.2384947263782183', 9: '0.12881517742829915', 10: '0.22766231110462157', 11: '1.2295325874375174', 12: '4.624976662810384e-2', 13: '0.13861963193662938', 14: '3.0800101683194355e-2'}
SEED_BHAT = {0: '1.8972105324811014e-2', 7: '3.4081103145494938', 8: '0.1260323883820921', 9: '0.11883750634511497', 10: '0.24910419978386875', 11: '-3.2699662199289783', 12: '0.3023798100228883', 15: '4.652989552070924e-2'}

# nodes that Verner fixes as short decimals
EXACT_NODES = {1: "0.03571", 4: "0.6134", 7: "0.6555", 8: "0.491625", 9: "0.06858",
               10: "0.253", 12: "0.8309", 13: "0.8998", 14: "1", 15: "1"}

A_SLOTS = [(i, j) for i in sorted(SEED_A) for j in sorted(SEED_A[i])]
B_SLOTS = sorted(SEED_B)
BH_SLOTS = sorted(SEED_BHAT)


def unpack(x, zero):
    a = [[zero] * S for _ in range(S)]
    k = 0
    for i, j in A_SLOTS:
        a[i][j] = x[k]
        k += 1
    b = [zero] * S
    for j in B_SLOTS:
        b[j] = x[k]
        k += 1
    bh = [zero] * S
    for j in BH_SLOTS:
        bh[j] = x[k]
        k += 1
    return a, b, bh


def residuals(x, one):
    zero = one * 0
    a, b, bh = unpack(x, zero)
    out = order_residuals(a, b, ORDER, one) + order_residuals(a, bh, ORDER_HAT, one)
    for i, val in EXACT_NODES.items():
        target = mpmath.mpf(val) if isinstance(one, mpmath.mpf) else float(val)
        out.append(sum(a[i][:i], zero) - target)
    return out


def jacobian(x):
    xf = np.array([complex(float(v)) for v in x])
    h = 1e-30
    cols = []
    for k in range(len(xf)):
        xp = xf.copy()
        xp[k] += 1j * h
        cols.append(np.imag(np.array(residuals(list(xp), 1.0 + 0j))) / h)
    return np.array(cols).T


def main():
    x = [mpmath.mpf(SEED_A[i][j]) for i, j in A_SLOTS]
    x += [mpmath.mpf(SEED_B[j]) for j in B_SLOTS]
    x += [mpmath.mpf(SEED_BHAT[j]) for j in BH_SLOTS]
    one = mpmath.mpf(1)

    jac = jacobian(x)
    for it in range(12):
        r = residuals(x, one)
        worst = max(abs(v) for v in r)
        print(f"iteration {it}: max residual {mpmath.nstr(worst, 5)}")
        if worst < mpmath.mpf("1e-52"):
            break
        rf = np.array([float(v) for v in r])
        step, *_ = np.linalg.lstsq(jac, -rf, rcond=1e-13)
        x = [xi + mpmath.mpf(float(si)) for xi, si in zip(x, step)]
    else:
        raise SystemExit("refinement did not converge")

    a, b, bh = unpack(x, mpmath.mpf(0))
    fmt = lambda v: mpmath.nstr(v, DIGITS, min_fixed=-3, max_fixed=3, strip_zeros=True) if v != 0 else "0"  # noqa: E731
    a_str = [[fmt(v) for v in row] for row in a]
    # nodes are written as the decimal sums of the written rows
    import decimal
    decimal.getcontext().prec = 90
    c_str = [str(sum((decimal.Decimal(v) for v in row[:i]), decimal.Decimal(0))) for i, row in enumerate(a_str)]
    text = format_tableau(
        c_str, a_str, [fmt(v) for v in b], [fmt(v) for v in bh], ORDER, ORDER_HAT,
        header_comment=(
            "Verner 16-stage efficient 9(8) pair (RKV98.IIa, 2024 revision).\n"
            f"Coefficients refined to {DIGITS} significant digits against all order conditions;\n"
            "regenerate with tools/refine_verner98.py."
        ),
    )
    # weights must sum to one in the written decimals, not only in mpmath
    out = ROOT / "src" / "renorm_nbody" / "data" / "verner98e.txt"
    out.write_text(text, encoding="ascii")
    parse_tableau(text, name=str(out))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
