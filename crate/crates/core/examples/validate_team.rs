//! Validate a hand-picked team, break it, then let the repair pass fix it.

use std::collections::BTreeMap;

use fancric::demo::DemoSet;
use fancric::model::{FantasyTeam, PlayerId};
use fancric::rules::{repair_team, validate_team};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let pool = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    let ids = |xs: &[&str]| xs.iter().map(|s| PlayerId::new(*s)).collect::<Vec<_>>();

    let team = FantasyTeam::new(
        ids(&[
            "lsg-dekock", "lsg-stoinis", "lsg-krunal", "lsg-bishnoi", "lsg-mohsin",
            "mi-rohit", "mi-surya", "mi-green", "mi-wadhera", "mi-chawla", "mi-behrendorff",
        ]),
        PlayerId::new("lsg-stoinis"),
        PlayerId::new("mi-surya"),
    );
    let report = validate_team(&team, &pool, &demo.rules)?;
    println!("hand-picked team valid: {}", report.ok);
    for v in &report.violations {
        println!("  {}: {}", v.code, v.detail);
    }

    // Ten players and a captain who doubles as vice-captain.
    let mut broken = team.clone();
    broken.players.pop();
    broken.vice_captain = broken.captain.clone();
    let report = validate_team(&broken, &pool, &demo.rules)?;
    println!("broken team:");
    for v in &report.violations {
        println!("  {}: {}", v.code, v.detail);
    }

    let preference: BTreeMap<PlayerId, f64> = pool.iter().map(|p| (p.player_id.clone(), p.credit_cost.to_f64())).collect();
    let repaired = repair_team(&broken, &demo.rules, &pool, &preference)?;
    println!(
        "repaired: {} players, C {}, VC {}, valid {}",
        repaired.players.len(),
        repaired.captain,
        repaired.vice_captain,
        validate_team(&repaired, &pool, &demo.rules)?.ok
    );
    Ok(())
}
