"""Circle-crossing crowd navigation: simulator, ORCA, and actor-critic training."""

from ._core import (  # noqa: F401
    A2cmpConfig,
    ActionTable,
    AgentState,
    DemoRecord,
    EpisodeRecord,
    EpisodeStep,
    EvalReport,
    ForwardTrace,
    JointState,
    NetworkParams,
    OrcaParams,
    Outcome,
    Scenario,
    ScenarioConfig,
    Vec2,
    build_action_table,
    collect_orca_demos,
    compute_orca_velocity,
    compute_reward,
    evaluate_checkpoint,
    evaluate_orca,
    forward,
    generate_scenario,
    init_network,
    integrate_step,
    label_of,
    load_checkpoint,
    run_orca_episode,
    save_checkpoint,
    separation_distance,
    snap_to_grid,
    train_a2cmp,
)
