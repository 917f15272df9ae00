#pragma once

namespace brakeidx {

/// Numerical knobs shared by every module. Plain value; pass by const&.
struct Config {
    double symplectic_tol = 1e-9;  ///< ‖MᵀJ₀M − J₀‖∞, relative to max(1, ‖M‖²)
    double rank_tol = 1e-8;        ///< singular values below this count as intersection
    double zero_eig_tol = 1e-6;    ///< upper bound of the kernel threshold for discretized operators
    int ode_steps = 4096;          ///< fixed RK4 steps per period
    int fourier_K = 32;            ///< Fourier truncation of asymptotic operators
    int shooting_max_iter = 100;

    double time_tol = 1e-10;     ///< crossing localisation in t
    double form_tol = 1e-6;      ///< crossing-form eigenvalues below this (relative) are degenerate
    double fd_rel_step = 1e-6;   ///< centered difference step, fraction of the interval length
    double truncation_tol = 1e-3;  ///< near-zero spectrum drift allowed between K and 2K
    int s_grid_points = 64;
    double s_grid_floor = 1e-10;
    double energy_tol = 1e-6;    ///< relative energy drift of integrate_orbit
};

}  // namespace brakeidx
