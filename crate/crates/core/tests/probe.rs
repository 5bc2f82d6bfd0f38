use snakegait_core::maps::GaitMaps;
use snakegait_core::planner::{plan_scenario, Environment, PlannerConfig};
use snakegait_core::tracking::{run_closed_loop, Disturbance, Gains, PlantModel};

#[test]
fn probe_closed_loop() {
    let maps = GaitMaps::default();
    let cfg = PlannerConfig::default();
    for k in 1..=3 {
        let env = Environment::bundled_scenario(k).unwrap();
        let out = plan_scenario(&env, &maps, &cfg).unwrap();
        let goal = env.goal_point();
        let rolled = out.plan.rollout(&maps);
        let roll_err = (rolled.last().unwrap().translation() - goal).norm();
        let clean = run_closed_loop(
            &out.plan,
            &PlantModel::map_kinematic(),
            &Gains::default(),
            &maps,
        )
        .unwrap();
        let err_clean = (clean.final_pose().translation() - goal).norm();
        let biased = PlantModel::MapKinematic {
            disturbance: Some(Disturbance {
                forward_bias: -20.0,
                ..Disturbance::default()
            }),
        };
        match run_closed_loop(&out.plan, &biased, &Gains::default(), &maps) {
            Ok(r) => {
                let err_rob = (r.final_pose().translation() - goal).norm();
                println!(
                    "scenario {k}: rollout={roll_err:.0} clean={err_clean:.1} (hold={}) biased={err_rob:.1} (hold={})",
                    clean.hold_engaged, r.hold_engaged
                );
            }
            Err(e) => println!("scenario {k}: rollout={roll_err:.0} clean={err_clean:.1} biased FAILED: {e}"),
        }
    }
}
