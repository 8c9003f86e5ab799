"""Smoke test for the quasilocal_py extension module.

Build and install it first, e.g. `pip install --no-build-isolation -e crates/python`.
"""

import cmath

import quasilocal_py as ql


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAILED: {what}")
    print(f"ok  {what}")


def main():
    print("quasilocal_py", ql.__version__)

    params = ql.ChainParams(4, 2, 0.5j)
    h = params.hamiltonian()
    check(len(h) == 4 and h[1][1] == 0.5j, "nearest-impurity Hamiltonian")

    report = ql.eigen_report(h)
    check(report["real"] and report["phase_class"] == "unbroken", "unbroken phase at Im gamma = 0.5")
    broken = ql.eigen_report(ql.ChainParams(4, 2, 1.5j).hamiltonian())
    check(not broken["real"], "broken phase at Im gamma = 1.5")

    metric = ql.ReducedMetric.nearest(params)
    check(ql.quasi_hermiticity_residual(metric.matrix(), h) < 1e-12, "nearest metric is quasi-Hermitian")
    scan = ql.scan_subsystems(metric, predicate="parity")
    check(scan.agreement() == (15, 15), "parity classification 15/15")

    farthest = ql.ReducedMetric.farthest(5, cmath.exp(1j * cmath.pi / 3))
    scan = ql.scan_subsystems(farthest, predicate="unit_disk")
    agree, total = scan.agreement()
    check(agree == total == 31, "unit-disk classification 31/31")

    small = ql.ReducedMetric.farthest(4, 0.5j)
    kernel = {tuple(r["mask"]): (r["local"], r["extensive"]) for r in ql.scan_subsystems(small).rows()}
    oracle = {tuple(r["mask"]): (r["local"], r["extensive"]) for r in ql.brute_force_scan(small)}
    check(kernel == oracle, "kernel criterion matches the Fock-space oracle")

    eta = ql.lift_metric(small)
    check(len(eta) == 16 and eta[0][0] == 1, "lifted metric fixes the vacuum")

    diag = ql.ReducedMetric.diagonal([1.0, 2.0, 3.0])
    check(diag.is_extensively_local([1, 3]), "diagonal metric: every subset extensive")

    s = ql.SchmidtDecomposition(ql.build_eta_max(1.0, 4, 4), 4, 4)
    check(s.schmidt_number == 10, "eta_max Schmidt number 10")
    bounds = s.bounds()
    check(bounds["local_observables"], "eta_max has local observables")

    try:
        ql.ReducedMetric([[1, 2], [0, 1]])
    except ValueError as e:
        check("Hermitian" in str(e), "non-Hermitian metric rejected")
    else:
        raise SystemExit("FAILED: non-Hermitian metric accepted")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
