//! Itemised fantasy points for the demo scorecard.

use fancric::demo::DemoSet;
use fancric::scoring::score_breakdown;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    let mut rows = Vec::new();
    for (id, perf) in &demo.perfs {
        let role = demo.pool.role_of(id).expect("scorecard players are in the pool");
        let parts = score_breakdown(perf, role, &demo.scoring)?;
        let total: fancric::points::Points = parts.iter().map(|c| c.points).sum();
        rows.push((total, id.clone(), parts));
    }
    rows.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    for (total, id, parts) in rows.iter().take(8) {
        let items: Vec<String> = parts.iter().map(|c| format!("{} {}", c.label, c.points)).collect();
        println!("{id:<16} {total:>6}  {}", items.join(", "));
    }
    Ok(())
}
