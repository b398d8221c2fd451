use proptest::prelude::*;
use seqresp_cli::config::ExperimentConfig;
use seqresp_cli::error::CliError;

fn config(points: usize, eps: f64) -> String {
    format!(
        "[grid]\npoints = {points}\n\n[run]\nmode = \"deterministic\"\noutput = \"out\"\nseed = 1\n\n\
         [reference]\ndegree = 2\n\n[kick]\nfield = [[1, 0.0, 0.1]]\n\n[response]\neps = [{eps:?}]\n"
    )
}

proptest! {
    #[test]
    fn grid_size_rule(points in 0usize..600) {
        let parsed = ExperimentConfig::parse(&config(points, 1e-3));
        let valid = points >= 16 && points % 2 == 0;
        prop_assert_eq!(parsed.is_ok(), valid);
        if let Err(e) = parsed {
            prop_assert_eq!(e.exit_code(), 1);
        }
    }

    #[test]
    fn eps_admissibility_follows_kick_distortion(eps in -1.0..1.0f64) {
        // sup|X'| = 0.2π, so the kick stays a diffeomorphism-with-margin below 0.5/(0.2π)
        let limit = 0.5 / (0.2 * std::f64::consts::PI);
        let c = ExperimentConfig::parse(&config(64, eps)).unwrap();
        let checked = c.check_mode();
        let admissible = eps > 0.0 && eps < limit * (1.0 - 1e-9);
        if admissible {
            prop_assert!(checked.is_ok());
        } else if eps <= 0.0 || eps > limit * (1.0 + 1e-9) {
            prop_assert!(matches!(checked, Err(CliError::Config(_))));
        }
    }

    #[test]
    fn config_round_trips_through_toml(points in 8usize..300, seed in any::<u32>()) {
        let points = points * 2;
        let text = config(points, 1e-3).replace("seed = 1", &format!("seed = {seed}"));
        let c = ExperimentConfig::parse(&text).unwrap();
        let again = ExperimentConfig::parse(&toml::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(again.grid.points, points);
        prop_assert_eq!(again.run.seed, seed as u64);
        prop_assert_eq!(again.response.eps, c.response.eps);
    }
}
