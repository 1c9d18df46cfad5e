//! Pick frequencies across the field and the team they add up to.

use fancric::analytics::{pick_frequencies, wisdom_of_crowds_team};
use fancric::demo::DemoSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let pool = demo.pool.clone().with_playing_xi(demo.context.playing_xi_ids().unwrap());
    let freqs = pick_frequencies(&demo.entries);
    let total = demo.entries.raw_count() as f64;

    let mut by_pick: Vec<_> = freqs.counts.iter().collect();
    by_pick.sort_by(|a, b| b.1.in_team.cmp(&a.1.in_team).then_with(|| a.0.cmp(b.0)));
    println!("most picked:");
    for (id, c) in by_pick.iter().take(5) {
        println!("  {id:<16} {:>5.1}%  captain {:>5.1}%", 100.0 * c.in_team as f64 / total, 100.0 * c.as_captain as f64 / total);
    }

    let team = wisdom_of_crowds_team(&freqs, &demo.rules, &pool)?;
    println!("crowd team: C {} VC {}", team.captain, team.vice_captain);
    for id in &team.players {
        println!("  {id}");
    }
    Ok(())
}
