"""Independent value-iteration reference for the reach-avoid toy task.

Writes tests/fixtures/toy_dp.json with values at the nominal start and the
return of the constrained policy rolled out from it.
"""
import json
import sys

import numpy as np

START = np.array([-0.6, 0.0])
GOAL = np.array([0.6, 0.0])
GOAL_R = 0.05 + 1e-9  # rim points count; absorbs float drift along the path
HAZ = np.array([0.0, -0.02])
HAZ_R = 0.3
STEP = 0.05
BONUS = 10.0
HORIZON = 200


def solve(n, gamma):
    xs = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(xs, xs, indexing="xy")  # [j, i]
    P = np.stack([X, Y], axis=-1)
    moves = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
    goal = np.linalg.norm(P - GOAL, axis=-1) <= GOAL_R

    def idx(v):
        return np.clip(np.rint((v + 1.0) * 0.5 * (n - 1)).astype(int), 0, n - 1)

    nxt, rew, haz = [], [], []
    for dx, dy in moves:
        q = np.clip(P + STEP * np.array([dx, dy]), -1, 1)
        i, j = idx(q[..., 0]), idx(q[..., 1])
        qs = np.stack([xs[i], xs[j]], axis=-1)
        d = np.linalg.norm(qs - GOAL, axis=-1)
        nxt.append((j, i))
        rew.append(-d + np.where(d <= GOAL_R, BONUS, 0.0))
        haz.append(np.linalg.norm(qs - HAZ, axis=-1) < HAZ_R)
    rew = np.array(rew)
    haz = np.array(haz)
    any_safe = (~haz).any(axis=0)
    mask = haz & any_safe[None]

    def vi(constrained):
        v = np.zeros((n, n))
        while True:
            q = np.array([rew[k] + gamma * v[nxt[k]] for k in range(9)])
            if constrained:
                q = np.where(mask, -np.inf, q)
            nv = np.where(goal, 0.0, q.max(axis=0))
            if np.abs(nv - v).max() <= 1e-8:
                return nv, q
            v = nv

    v_u, _ = vi(False)
    v_c_r, q = vi(True)
    q = np.array([rew[k] + gamma * v_c_r[nxt[k]] for k in range(9)])
    q = np.where(mask, -np.inf, q)
    pol = q.argmax(axis=0)

    pos = START.copy()
    ret = cost = 0.0
    steps = 0
    while True:
        k = pol[idx(pos[1]), idx(pos[0])]
        dx, dy = moves[k]
        pos = np.clip(pos + STEP * np.array([dx, dy]), -1, 1)
        steps += 1
        d = np.linalg.norm(pos - GOAL)
        reached = d <= GOAL_R
        ret += -d + (BONUS if reached else 0.0)
        cost += float(np.linalg.norm(pos - HAZ) < HAZ_R)
        if reached or steps >= HORIZON:
            break
    si = (idx(START[1]), idx(START[0]))
    return {
        "grid_n": n,
        "gamma": gamma,
        "v_r_unconstrained_start": float(v_u[si]),
        "v_r_constrained_start": float(v_c_r[si]),
        "rollout_return": ret,
        "rollout_cost": cost,
        "rollout_length": steps,
        "rollout_arrived": bool(reached),
    }


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/toy_dp.json"
    res = solve(41, 0.99)
    with open(out, "w") as f:
        json.dump(res, f, indent=2)
    print(json.dumps(res, indent=2))
