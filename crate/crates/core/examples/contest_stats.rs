//! Score the demo contest field and print its distribution.

use fancric::analytics::{score_entries, summarize, SummaryOptions, Weighting};
use fancric::demo::DemoSet;
use fancric::points::Points;
use fancric::scoring::base_points_table;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = DemoSet::committed()?;
    println!(
        "{} entries, {} distinct teams",
        demo.entries.raw_count(),
        demo.entries.unique_count()
    );
    let base = base_points_table(&demo.pool, &demo.perfs, &demo.scoring)?;
    let points = score_entries(&demo.entries, &base, &demo.scoring)?;
    for weighting in [Weighting::Multiplicity, Weighting::Unique] {
        let s = summarize(&demo.entries, &points, &SummaryOptions { bin_width: Points::whole(50), weighting })?;
        println!("-- {weighting:?}");
        print!("{}", s.to_text());
    }
    let s = summarize(&demo.entries, &points, &SummaryOptions { bin_width: Points::whole(50), weighting: Weighting::Multiplicity })?;
    print!("{}", s.histogram_csv());
    Ok(())
}
