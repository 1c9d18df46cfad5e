//! Innings weather and search answers from the fixture sources.

use fancric::demo::{fixtures_dir, match_context, FixtureSources};
use fancric::pipeline::{odds_query, pitch_query};
use fancric::sources::{fetch_innings_weather, SearchClient};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = match_context();
    let sources = FixtureSources::new(&fixtures_dir());
    let snaps = fetch_innings_weather(ctx.venue.latitude, ctx.venue.longitude, &ctx.innings_windows, &sources.weather)?;
    for s in &snaps {
        println!(
            "innings {}: {:.1} C, wind {:.1} km/h, cloud {:.0}%, humidity {:.0}%, dew point {:.1} C",
            s.innings_index,
            s.temperature_c,
            s.wind_speed_kmh,
            s.cloud_cover_pct,
            s.humidity_pct,
            s.dew_point_c
        );
    }
    for q in [odds_query(&ctx), pitch_query(&ctx)] {
        let a = sources.search.search(&q)?;
        println!("{q}\n  {}", a.answer);
    }
    Ok(())
}
