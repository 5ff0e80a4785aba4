"""Ground-truth oracles: counterfactual cost curves and regret.

The generator knows the true outcome process, so it can answer "what would
action z really cost" by fresh counterfactual simulation, independent of any
logged data. Sharing one random stream across all actions makes the whole
curve reproducible and lets regret be measured without Monte Carlo noise
between actions.
"""

import numpy as np

from predopt import TrueModel, evaluate_decision, make_grid, oracle_action, oracle_expected_cost

# demand independent of the action: the textbook newsvendor
world = TrueModel(
    kind="newsvendor",
    base_weights=(0.0,),
    intercept=10.0,
    action_effect=0.0,
    nonlinearity=0.0,
    noise_sd=2.0,
    feature_sd=1.0,
    cost_params={"c_h": 1.0, "c_s": 3.0},
    logging={"policy": "uniform"},
)
grid = make_grid(0.0, 20.0, 201)

action, cost = oracle_action(world, grid, n_mc=200000, seed=0)
print(f"oracle action {action:.1f}, expected cost {cost:.4f}")
print("analytic optimum: mu + sigma * quantile(0.75) = 10 + 2*0.674 = 11.35")

print("\ntrue cost at a few candidate stocks:")
for z in (8.0, 10.0, 11.3, 13.0, 16.0):
    c = oracle_expected_cost(world, z, n_mc=200000, seed=0)
    print(f"  z = {z:5.1f}: cost = {c:.4f}")

print("\nregret of deliberately bad decisions (same random stream):")
for z in (action, 12.0, 15.0, 20.0):
    cost_z, regret = evaluate_decision(world, z, grid, n_mc=200000, seed=0)
    print(f"  z = {z:5.1f}: cost = {cost_z:.4f}  regret = {regret:.4f}")

# a pricing example: revenue -z * min(demand, capacity), demand falls with price
pricing = TrueModel(
    kind="pricing",
    base_weights=(0.0,),
    intercept=12.0,
    action_effect=-2.0,
    nonlinearity=0.0,
    noise_sd=0.5,
    feature_sd=1.0,
    cost_params={"capacity": 50.0},
    logging={"policy": "uniform"},
)
price_grid = make_grid(0.0, 6.0, 61)
best_price, neg_revenue = oracle_action(pricing, price_grid, n_mc=100000, seed=1)
print(f"\npricing: demand 12 - 2z, revenue z*(12-2z) peaks at z = 3")
print(f"oracle price {best_price:.1f}, expected revenue {-neg_revenue:.3f}")
