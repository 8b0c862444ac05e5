"""Walk through the corruption schedule and the closed-form forward process.

The forward chain destroys an image step by step; the precomputed tables
(eta_t, a_bar_t, sigma_t^2) let us jump to any corruption level directly.
Run from the repository root:

    python demos/01_schedule_and_forward_process.py
"""

import pathlib

import numpy as np

from vbdenoise import build_schedule, recorrupt, save_image
from vbdenoise.rng import stream

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# The default schedule: 1000 steps, per-step variance rising linearly from
# 1e-4 to 0.02. a_bar_t is the surviving signal fraction.
sched = build_schedule()
print(f"T = {sched.T}")
for t in (1, 100, 250, 500, 750, 1000):
    print(f"  t={t:4d}  eta={sched.eta_at(t):.5f}  a_bar={sched.a_bar_at(t):.6f}  "
          f"sigma2={sched.sigma2_at(t):.3e}")
print(f"a_bar at T: {sched.a_bar_at(1000):.2e}  (almost pure noise)")

# Make a simple scene: a bright disc on a dark gradient.
h = w = 96
yy, xx = np.mgrid[0:h, 0:w]
scene = np.where((yy - 48) ** 2 + (xx - 48) ** 2 < 22**2, 0.7, -0.5 + 0.6 * xx / w)
scene = scene[:, :, None]
save_image(scene, out_dir / "forward_t0000.png")

# Jump straight to several corruption levels with one draw each; this is
# exactly how the observation is re-corrupted inside the restoration loop.
for t in (100, 300, 600, 1000):
    y_t = recorrupt(scene, sched, t, stream(7, t))
    save_image(np.clip(y_t, -1, 1), out_dir / f"forward_t{t:04d}.png")
    print(f"wrote forward_t{t:04d}.png  (empirical std {y_t.std():.3f})")

print(f"\nimages in {out_dir}")
