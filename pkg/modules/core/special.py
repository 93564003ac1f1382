"""
special.py - Special functions and scalar distribution samplers

CDFs and quantiles of the standard normal and Student-t distributions (the
latter through the regularized incomplete beta), and the gamma, chi-square,
Dirichlet and exponential samplers used by the correlation, multivariate and
Dirichlet-process layers.

All functions accept numpy arrays as well as scalars. Degrees of freedom may be
a DegreesOfFreedom, a number, or "inf"; INFINITE dispatches to the normal.

Changes:
- Initial implementation on top of scipy.special
- Student-t quantile polished with one Newton step from scipy's stdtrit
- Dirichlet sampling done in log space with the sub-unit shape boost so that
  concentrations far below 1 never underflow to an all-zero draw
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

from modules.core.errors import DomainError
from modules.core.rng import as_generator
from modules.core.types import as_dof

# Returned by sample_chi_square for INFINITE dof: callers use a divisor of exactly 1.
CHI_SQUARE_INFINITE = math.inf


def _scalar_or_array(values):
    values = np.asarray(values, dtype=float)
    return values.item() if values.ndim == 0 else values


def _check_open_unit(p, name="p"):
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise DomainError(f"{name} must lie strictly between 0 and 1, got {p}")
    return p_arr


def _dof_value(dof) -> float:
    return as_dof(dof).value


def std_normal_cdf(x):
    """
    Standard normal CDF, Phi(x).

    Args:
        x: Real number or array

    Returns:
        Probability or array of probabilities
    """
    return _scalar_or_array(sc.ndtr(np.asarray(x, dtype=float)))


def std_normal_quantile(p):
    """
    Inverse of the standard normal CDF.

    Raises:
        DomainError: If p is not strictly between 0 and 1
    """
    p_arr = _check_open_unit(p)
    return _scalar_or_array(sc.ndtri(p_arr))


def regularized_incomplete_beta(a, b, x):
    """
    Regularized incomplete beta function I_x(a, b).

    Raises:
        DomainError: If a or b is not positive or x is outside [0, 1]
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(a_arr <= 0) or np.any(b_arr <= 0):
        raise DomainError(f"Incomplete beta needs a > 0 and b > 0, got a={a}, b={b}")
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise DomainError(f"Incomplete beta needs 0 <= x <= 1, got x={x}")
    return _scalar_or_array(sc.betainc(a_arr, b_arr, x_arr))


def _t_cdf_finite(x, nu):
    return sc.stdtr(nu, x)


def student_t_cdf(x, dof):
    """
    CDF of the standard Student-t with the given degrees of freedom.

    Args:
        x: Real number or array
        dof: Degrees of freedom (INFINITE gives the normal CDF)

    Returns:
        Probability or array of probabilities
    """
    nu = _dof_value(dof)
    x_arr = np.asarray(x, dtype=float)
    if math.isinf(nu):
        return _scalar_or_array(sc.ndtr(x_arr))
    return _scalar_or_array(_t_cdf_finite(x_arr, nu))


def _t_pdf(x, nu):
    log_norm = sc.gammaln((nu + 1.0) / 2.0) - sc.gammaln(nu / 2.0) - 0.5 * np.log(nu * np.pi)
    return np.exp(log_norm - (nu + 1.0) / 2.0 * np.log1p(x * x / nu))


def student_t_quantile(p, dof):
    """
    Inverse of the Student-t CDF.

    The initial value comes from scipy's stdtrit; a single Newton step on the
    CDF tightens the round trip.

    Raises:
        DomainError: If p is not strictly between 0 and 1
    """
    p_arr = _check_open_unit(p)
    nu = _dof_value(dof)
    if math.isinf(nu):
        return _scalar_or_array(sc.ndtri(p_arr))
    x = sc.stdtrit(nu, p_arr)
    density = _t_pdf(x, nu)
    step = np.where(density > 0, (sc.stdtr(nu, x) - p_arr) / np.where(density > 0, density, 1.0), 0.0)
    return _scalar_or_array(x - step)


def student_t_cdf_vector(x, dofs):
    """
    Element-wise Student-t CDF with per-coordinate degrees of freedom.

    Args:
        x (numpy.ndarray): Statistics, last axis of length m
        dofs (numpy.ndarray): Length-m degrees of freedom, inf for normal coordinates

    Returns:
        numpy.ndarray: CDF values with the shape of x
    """
    x = np.asarray(x, dtype=float)
    dofs = np.asarray(dofs, dtype=float)
    infinite = np.isinf(dofs)
    finite_nu = np.where(infinite, 1.0, dofs)
    return np.where(infinite, sc.ndtr(x), sc.stdtr(finite_nu, x))


def sample_gamma(shape, rng, size=None):
    """
    Draw Gamma(shape, scale 1) variates.

    Shapes below 1 use the boost G(a) = G(a + 1) * U^(1/a), so every shape goes
    through numpy's squeeze/rejection sampler at a shape of at least 1.

    Args:
        shape: Positive shape (scalar or array)
        rng: RngStream, numpy Generator or int seed
        size: Optional output size

    Raises:
        DomainError: If any shape is not positive
    """
    shape_arr = np.asarray(shape, dtype=float)
    if np.any(~(shape_arr > 0)):
        raise DomainError(f"Gamma shape must be positive, got {shape}")
    gen = as_generator(rng)
    return _scalar_or_array(np.exp(log_gamma_variates(shape_arr, gen, size=size)))


def log_gamma_variates(shapes, gen, size=None):
    """
    Logarithms of Gamma(shape, 1) draws, stable for very small shapes.

    Args:
        shapes (numpy.ndarray): Positive shapes
        gen (numpy.random.Generator): Source of randomness
        size: Optional output size (broadcast against shapes)

    Returns:
        numpy.ndarray: log G for each requested draw
    """
    shapes = np.asarray(shapes, dtype=float)
    if size is not None:
        shapes = np.broadcast_to(shapes, size)
    small = shapes < 1.0
    boosted = np.where(small, shapes + 1.0, shapes)
    log_g = np.log(gen.gamma(boosted))
    if np.any(small):
        u = gen.random(shapes.shape)
        log_g = np.where(small, log_g + np.log(u) / np.where(small, shapes, 1.0), log_g)
    return log_g


def sample_chi_square(dof, rng):
    """
    Draw one chi-square variate.

    Args:
        dof: Degrees of freedom
        rng: RngStream, numpy Generator or int seed

    Returns:
        float: A chi-square draw, or CHI_SQUARE_INFINITE when dof is INFINITE;
        callers then take sqrt(V / nu) as exactly 1
    """
    nu = _dof_value(dof)
    if math.isinf(nu):
        return CHI_SQUARE_INFINITE
    gen = as_generator(rng)
    return 2.0 * float(np.exp(log_gamma_variates(np.asarray(nu / 2.0), gen)))


def chi_square_divisors(dofs, gen, size=None):
    """
    Draw the element-wise divisors sqrt(V_j / nu_j), V_j ~ chi-square(nu_j).

    Coordinates with infinite degrees of freedom get a divisor of exactly 1 and
    consume no randomness.

    Args:
        dofs (numpy.ndarray): Length-m degrees of freedom (inf allowed)
        gen (numpy.random.Generator): Source of randomness
        size (int, optional): Number of independent divisor vectors to draw

    Returns:
        numpy.ndarray: Shape (m,) or (size, m)
    """
    dofs = np.asarray(dofs, dtype=float)
    finite = ~np.isinf(dofs)
    shape = dofs.shape if size is None else (size,) + dofs.shape
    divisors = np.ones(shape)
    if np.any(finite):
        nu = dofs[finite]
        draw_shape = nu.shape if size is None else (size,) + nu.shape
        v = gen.chisquare(np.broadcast_to(nu, draw_shape))
        divisors[..., finite] = np.sqrt(v / nu)
    return divisors


def sample_dirichlet(concentrations, rng, size=None):
    """
    Draw from a Dirichlet distribution.

    Gamma draws are made in log space and normalized with a softmax, so
    concentrations far below 1 still give a proper probability vector.

    Args:
        concentrations: Positive concentration vector (last axis), or an (n, m)
            array of per-draw concentrations
        rng: RngStream, numpy Generator or int seed
        size (int, optional): Number of draws for a single concentration vector

    Returns:
        numpy.ndarray: Probability vector(s) summing to 1 along the last axis

    Raises:
        DomainError: If any concentration is not positive
    """
    alpha = np.asarray(concentrations, dtype=float)
    if alpha.ndim == 0 or alpha.shape[-1] == 0:
        raise DomainError("Dirichlet needs at least one concentration")
    if np.any(~(alpha > 0)):
        raise DomainError(f"Dirichlet concentrations must be positive, got {concentrations}")
    gen = as_generator(rng)
    if size is not None:
        alpha = np.broadcast_to(alpha, (size,) + alpha.shape)
    if alpha.shape[-1] == 1:
        return np.ones(alpha.shape)
    log_g = log_gamma_variates(alpha, gen)
    return sc.softmax(log_g, axis=-1)


def sample_exponential(rate, rng, size=None):
    """
    Draw Exponential(rate) variates (mean 1/rate).

    Raises:
        DomainError: If rate is not positive
    """
    if not rate > 0:
        raise DomainError(f"Exponential rate must be positive, got {rate}")
    gen = as_generator(rng)
    return _scalar_or_array(gen.exponential(1.0 / rate, size=size))


def exponential_quantile(u, rate=1.0):
    """Inverse CDF of Exponential(rate): -log(1 - u) / rate."""
    if not rate > 0:
        raise DomainError(f"Exponential rate must be positive, got {rate}")
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0) | (u_arr >= 1)):
        raise DomainError(f"u must lie in [0, 1), got {u}")
    return _scalar_or_array(-np.log1p(-u_arr) / rate)
