#!/usr/bin/env python3

from prequant.pq_geometry.pq_fields import FD_STEP
from prequant.pq_geometry.pq_quadrature import GAUSS_ORDER, RADIAL_NODES, TRAPEZOID_NODES

# > Keys are "section.key". Values fix the type that overrides are coerced to;
#   tuples are comma-separated in config files.
settings_default = {
    "run.seed": 0,
    "run.samples": 200,
    "quadrature.gauss_order": GAUSS_ORDER,
    "quadrature.trapezoid_nodes": TRAPEZOID_NODES,
    "quadrature.radial_nodes": RADIAL_NODES,
    "quadrature.fd_step": FD_STEP,
    "tolerance.pullback": 1e-3,
    "tolerance.identity": 1e-12,
    "tolerance.invertibility": 1e-6,
    "tolerance.convergence_ratio": 4.0,
    "tolerance.gauge": 1e-5,
    "tolerance.path": 1e-5,
    "tolerance.hermitian": 1e-10,
    "tolerance.holonomy": 1e-8,
    "tolerance.equivariance": 1e-5,
    "tolerance.invariance": 1e-6,
    "tolerance.symmetry_breaking": 1e-3,
    "tolerance.period": 1e-9,
    "tolerance.circle_pullback": 1e-4,
    "tolerance.level": 1e-6,
    "tolerance.root": 1e-10,
    "tolerance.dd_numeric": 1e-4,
    "tolerance.dd_analytic": 1e-6,
    "tolerance.stokes": 1e-6,
    "darboux.epsilon": 1.0,
    "darboux.center": (0.0, 0.0),
    "darboux.radius": 0.3,
    "darboux.steps": 100,
    "darboux.samples": 100,
    "moser.epsilon": 0.2,
    "moser.steps": 200,
    "moser.refined_steps": 400,
    "moser.convergence_steps": (1, 2, 4),
    "moser.gauge_samples": 50,
    "weinstein.epsilon": 0.2,
    "weinstein.breaking": 0.1,
    "weinstein.steps": 100,
    "weinstein.samples": 100,
    "weinstein.elements": (0.7, 1.9, 3.1, 4.4),
    "weinstein.averaging_nodes": 16,
    "gauge.k": 1,
    "gauge.amplitude": 1.0,
    "gauge.samples": 100,
    "torus.k": 1,
    "torus.c_values": (0.0, 0.3, 0.5, 1.0, 2.0),
    "torus.product_fixed": (0.0, 1.0),
    "bs.k_values": (1, 2, 3),
    "bs.grid_step": 0.01,
    "independence.k": 2,
    "independence.random": 20,
    "independence.grid_step": 0.01,
    "riemann_roch.k_values": (1, 2, 3),
    "riemann_roch.torus_k": 1,
    "calculus.fields": 200,
    "calculus.points": 20,
    "calculus.rectangles": 20,
    "calculus.loops": 10,
}
