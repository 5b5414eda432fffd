"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written the slow, literal way (explicit
index loops, defining integrals, textbook rate equations) so that
agreement with the production code is meaningful.
"""

import numpy as np
from scipy import integrate


def kron_entrywise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product from its index definition, one entry at a time."""
    da, db = a.shape[0], b.shape[0]
    out = np.zeros((da * db, da * db), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    out[i * db + k, j * db + l] = a[i, j] * b[k, l]
    return out


def four_index_generator(h: np.ndarray, couplings) -> tuple[np.ndarray, np.ndarray]:
    """Master-equation generator assembled from the four-index tensor.

    ``couplings`` is a list of (s, rate) pairs. Works in the energy
    eigenbasis of ``h`` with column-stacked vectorization (rho[m, n] at
    position n*d + m) and returns (generator, eigenvector matrix).

    The element sums are written exactly as the eigenbasis equation of
    motion dictates, with R[m, n, j, k](w) = S[m, n] S[j, k] Gamma(w)
    and the frequency argument of each term spelled out.
    """
    d = h.shape[0]
    w, v = np.linalg.eigh(h)
    gen = np.zeros((d * d, d * d), dtype=complex)

    def pos(m, n):
        return n * d + m

    for m in range(d):
        for n in range(d):
            gen[pos(m, n), pos(m, n)] += -1j * (w[m] - w[n])

    for s_comp, rate in couplings:
        s = v.conj().T @ s_comp @ v

        def r_elem(a, b, c, e, freq):
            return s[a, b] * s[c, e] * rate(freq)

        for m in range(d):
            for n in range(d):
                row = pos(m, n)
                for j in range(d):
                    for k in range(d):
                        # relaxation out of rho[k, n]
                        gen[row, pos(k, n)] -= r_elem(m, j, j, k, w[k] - w[j])
                        # relaxation out of rho[m, j] (conjugate channel)
                        gen[row, pos(m, j)] -= np.conj(
                            r_elem(n, k, k, j, w[j] - w[k]))
                        # feeding terms from rho[j, k]
                        gen[row, pos(j, k)] += r_elem(k, n, m, j, w[j] - w[m])
                        gen[row, pos(j, k)] += np.conj(
                            r_elem(j, m, n, k, w[k] - w[n]))
    return gen, v


def to_eigenbasis_superop(gen_computational: np.ndarray,
                          v: np.ndarray) -> np.ndarray:
    """Conjugate a column-stacking superoperator into the eigenbasis of v."""
    t = np.kron(v.T, v.conj().T)
    t_inv = np.kron(v.conj(), v)
    return t @ gen_computational @ t_inv


def dawson_quadrature(y: float, rtol: float = 1e-13) -> float:
    """Dawson integral straight from its defining integral."""
    if y == 0:
        return 0.0
    sign = 1.0
    if y < 0:
        sign, y = -1.0, -y
    val, _ = integrate.quad(lambda t: np.exp(t * t - y * y), 0.0, y,
                            epsabs=0.0, epsrel=rtol, limit=400)
    return sign * val


def dawson_asymptotic3(y: float) -> float:
    """Three-term large-argument expansion 1/(2y) + 1/(4y^3) + 3/(8y^5)."""
    return 1.0 / (2.0 * y) + 1.0 / (4.0 * y**3) + 3.0 / (8.0 * y**5)


def secular_two_level_rate_current(gap: float, j_left: float, j_right: float,
                                   n_left: float, n_right: float) -> float:
    """Left-contact current of a two-state rate equation, solved longhand.

    Excitation rate per contact 2*pi*J*n, relaxation 2*pi*J*(n+1);
    stationary populations from balancing total rates, current from the
    left contact's net excitation flow times the transition energy.
    """
    up_l = 2.0 * np.pi * j_left * n_left
    down_l = 2.0 * np.pi * j_left * (n_left + 1.0)
    up_r = 2.0 * np.pi * j_right * n_right
    down_r = 2.0 * np.pi * j_right * (n_right + 1.0)
    total = up_l + down_l + up_r + down_r
    if total == 0.0:
        return 0.0
    p_excited = (up_l + up_r) / total
    p_ground = (down_l + down_r) / total
    return gap * (up_l * p_ground - down_l * p_excited)


def sequential_resonant_current(gap: float, j_at_gap_left: float,
                                j_at_gap_right: float, t_left: float,
                                t_right: float) -> float:
    """Weak-coupling resonant formula evaluated with a supplied density."""
    n_l = 1.0 / np.expm1(gap / t_left)
    n_r = 1.0 / np.expm1(gap / t_right)
    num = 2.0 * np.pi * gap * j_at_gap_left * j_at_gap_right * (n_l - n_r)
    den = (j_at_gap_left * (2.0 * n_l + 1.0)
           + j_at_gap_right * (2.0 * n_r + 1.0))
    return num / den
