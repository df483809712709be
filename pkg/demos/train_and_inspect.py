"""Train a guidance policy on the abstract scene MDP and poke at it.

Runs a short training pass (a few thousand episodes instead of the full
15000), compares the learned greedy policy against the exact
value-iteration solution, and prints the checkpoint learning curve next
to the greedy-sweep reference.
"""

from ghal360 import (
    MdpConfig,
    ScenarioConfig,
    TrainerConfig,
    decode_state,
    evaluate_checkpoints,
    fgs_action,
    solve_value_iteration,
    train,
)
from ghal360.mdp import enumerate_single_target_states

SEED = 0

# --- train -----------------------------------------------------------------

trainer = TrainerConfig(episodes=4000, checkpoint_every=500)
scenario = ScenarioConfig.pattern_uniform()

checkpoints = []
result = train(
    trainer,
    MdpConfig(),
    scenario,
    SEED,
    checkpoint_sink=lambda ep, table: checkpoints.append((ep, table)),
)
print(f"trained {trainer.episodes} episodes, seed {SEED}")
print(f"visited {int((result.table.visit_counts.sum(axis=1) > 0).sum())} states")

# --- compare against the exact solution -------------------------------------

oracle = solve_value_iteration(MdpConfig())
states = enumerate_single_target_states(scenario)

agree = 0
for i in states:
    learned = result.table.greedy_action(int(i))
    # count as agreement when the learned action's exact Q ties the optimum
    if oracle.values[i, int(learned)] >= oracle.values[i].max() - 1e-9:
        agree += 1
print(f"greedy matches an optimal action on {agree}/{len(states)} start states")

# a few clean single-target scenes worth staring at; the target sits at
# base-4 digit p, the focus wedge is digit 0
for ego_pos in (1, 4, 7):
    i = 2 * 4**ego_pos
    q = oracle.values[i]
    print(
        f"target at ego wedge {ego_pos}: "
        f"Q(confirm,left,right) = {q[0]:8.3f} {q[1]:8.3f} {q[2]:8.3f} "
        f"-> learned {result.table.greedy_action(i).name.lower()}, "
        f"shortest-rotation {fgs_action(decode_state(i)).name.lower()}"
    )

# --- learning curve ---------------------------------------------------------

curve = evaluate_checkpoints(
    [table.policy_array() for _, table in checkpoints],
    [ep for ep, _ in checkpoints],
    MdpConfig(),
    scenario,
    seed=100,
    eval_episodes=400,
)
print(f"\ngreedy-sweep reference return: {curve.fgs_mean_reward:.2f}")
for ep, r in zip(curve.episodes, curve.mean_reward):
    bar = "#" * max(0, int((r + 50) / 8))
    print(f"  after {ep:5d} episodes: {r:8.2f}  {bar}")
