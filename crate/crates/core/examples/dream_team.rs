//! Solve the Dream Team for the demo match.

use fancric::analytics::dream_team;
use fancric::demo::DemoSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let pool = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    let dt = dream_team(&pool, &demo.perfs, &demo.rules, &demo.scoring)?;
    for id in &dt.team.players {
        let p = pool.get(id).unwrap();
        let tag = if *id == dt.team.captain { "C" } else if *id == dt.team.vice_captain { "VC" } else { "" };
        println!("{:<3}{:<5}{:<20}{:>7}", tag, p.role.code(), p.name, dt.score.per_player[id]);
    }
    println!("total {}", dt.score.total);
    Ok(())
}
