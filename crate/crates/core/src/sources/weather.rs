use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::SourceError;
use crate::http::{send_with_retry, HttpRequest, HttpTransport, RetryPolicy};
use crate::model::TimeWindow;

pub const HOURLY_FIELDS: &str =
    "temperature_2m,wind_speed_10m,cloud_cover,relative_humidity_2m,dew_point_2m";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSnapshot {
    pub innings_index: u8,
    pub temperature_c: f64,
    pub wind_speed_kmh: f64,
    pub cloud_cover_pct: f64,
    pub humidity_pct: f64,
    pub dew_point_c: f64,
    pub fetched_at: DateTime<Utc>,
}

/// Raw hourly forecast body as served (or as stored in a fixture).
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherPayload {
    pub body: String,
    pub fetched_at: DateTime<Utc>,
}

pub trait WeatherClient: Send + Sync {
    fn hourly(
        &self,
        latitude: f64,
        longitude: f64,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<WeatherPayload, SourceError>;
}

pub fn weather_fixture_name(latitude: f64, longitude: f64, start: NaiveDate, end: NaiveDate) -> String {
    format!("{latitude:.4}_{longitude:.4}_{start}_{end}.json")
}

/// Reads `<dir>/<lat>_<lon>_<start>_<end>.json`.
pub struct FixtureWeather {
    dir: PathBuf,
    fetched_at: DateTime<Utc>,
}

impl FixtureWeather {
    pub fn new(dir: impl Into<PathBuf>, fetched_at: DateTime<Utc>) -> Self {
        FixtureWeather {
            dir: dir.into(),
            fetched_at,
        }
    }
}

impl WeatherClient for FixtureWeather {
    fn hourly(&self, lat: f64, lon: f64, start: NaiveDate, end: NaiveDate) -> Result<WeatherPayload, SourceError> {
        let name = weather_fixture_name(lat, lon, start, end);
        match fs::read_to_string(self.dir.join(&name)) {
            Ok(body) => Ok(WeatherPayload {
                body,
                fetched_at: self.fetched_at,
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(SourceError::MissingFixture {
                kind: "weather",
                key: name,
            }),
            Err(e) => Err(e.into()),
        }
    }
}

/// Open-Meteo style hourly endpoint.
pub struct LiveWeather {
    transport: Arc<dyn HttpTransport>,
    base_url: String,
    retry: RetryPolicy,
}

impl LiveWeather {
    pub const DEFAULT_URL: &'static str = "https://api.open-meteo.com/v1/forecast";

    pub fn new(transport: Arc<dyn HttpTransport>, base_url: impl Into<String>) -> Self {
        LiveWeather {
            transport,
            base_url: base_url.into(),
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }
}

impl WeatherClient for LiveWeather {
    fn hourly(&self, lat: f64, lon: f64, start: NaiveDate, end: NaiveDate) -> Result<WeatherPayload, SourceError> {
        let url = format!(
            "{}?latitude={lat:.4}&longitude={lon:.4}&hourly={HOURLY_FIELDS}&start_date={start}&end_date={end}&timezone=GMT",
            self.base_url
        );
        let resp = send_with_retry(self.transport.as_ref(), &HttpRequest::get(url), &self.retry)?;
        Ok(WeatherPayload {
            body: resp.body,
            fetched_at: Utc::now(),
        })
    }
}

/// Fetches through another client and stores each payload as a fixture.
pub struct RecordingWeather<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: WeatherClient> RecordingWeather<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        RecordingWeather {
            inner,
            dir: dir.into(),
        }
    }
}

impl<C: WeatherClient> WeatherClient for RecordingWeather<C> {
    fn hourly(&self, lat: f64, lon: f64, start: NaiveDate, end: NaiveDate) -> Result<WeatherPayload, SourceError> {
        let payload = self.inner.hourly(lat, lon, start, end)?;
        fs::create_dir_all(&self.dir)?;
        fs::write(self.dir.join(weather_fixture_name(lat, lon, start, end)), &payload.body)?;
        Ok(payload)
    }
}

#[derive(Deserialize)]
struct Hourly {
    time: Vec<String>,
    temperature_2m: Vec<Option<f64>>,
    wind_speed_10m: Vec<Option<f64>>,
    cloud_cover: Vec<Option<f64>>,
    relative_humidity_2m: Vec<Option<f64>>,
    dew_point_2m: Vec<Option<f64>>,
}

#[derive(Deserialize)]
struct Body {
    hourly: Hourly,
}

fn parse_hour(s: &str) -> Result<DateTime<Utc>, SourceError> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M")
        .map(|t| t.and_utc())
        .map_err(|e| SourceError::Protocol(format!("bad hourly time `{s}`: {e}")))
}

/// One snapshot per innings: the mean of the hourly points inside each window.
pub fn fetch_innings_weather(
    latitude: f64,
    longitude: f64,
    windows: &[TimeWindow; 2],
    client: &dyn WeatherClient,
) -> Result<[WeatherSnapshot; 2], SourceError> {
    if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
        return Err(SourceError::InvalidInput(format!(
            "coordinates ({latitude}, {longitude}) out of range"
        )));
    }
    if windows.iter().any(|w| w.start >= w.end) || windows[0].end > windows[1].start {
        return Err(SourceError::InvalidInput("innings windows must be ordered and non-overlapping".into()));
    }
    let start = windows[0].start.date_naive();
    let end = windows[1].end.date_naive();
    let payload = client.hourly(latitude, longitude, start, end)?;
    let body: Body = serde_json::from_str(&payload.body).map_err(|e| SourceError::Protocol(e.to_string()))?;
    let h = body.hourly;
    let n = h.time.len();
    let columns = [
        &h.temperature_2m,
        &h.wind_speed_10m,
        &h.cloud_cover,
        &h.relative_humidity_2m,
        &h.dew_point_2m,
    ];
    if columns.iter().any(|c| c.len() != n) {
        return Err(SourceError::Protocol("hourly arrays differ in length".into()));
    }
    let times = h.time.iter().map(|t| parse_hour(t)).collect::<Result<Vec<_>, _>>()?;

    let snapshot = |k: usize| -> Result<WeatherSnapshot, SourceError> {
        let w = &windows[k];
        let innings = k as u8 + 1;
        let idx: Vec<usize> = (0..n).filter(|&i| times[i] >= w.start && times[i] < w.end).collect();
        if idx.is_empty() {
            return Err(SourceError::OutsideHorizon { innings });
        }
        let mut means = [0.0f64; 5];
        for (m, col) in means.iter_mut().zip(columns) {
            let mut sum = 0.0;
            for &i in &idx {
                sum += col[i].ok_or(SourceError::OutsideHorizon { innings })?;
            }
            *m = sum / idx.len() as f64;
        }
        let [temperature_c, wind_speed_kmh, cloud_cover_pct, humidity_pct, dew_point_c] = means;
        if !(0.0..=100.0).contains(&cloud_cover_pct) || !(0.0..=100.0).contains(&humidity_pct) {
            return Err(SourceError::Protocol("cloud cover or humidity outside [0, 100]".into()));
        }
        Ok(WeatherSnapshot {
            innings_index: innings,
            temperature_c,
            wind_speed_kmh,
            cloud_cover_pct,
            humidity_pct,
            dew_point_c,
            fetched_at: payload.fetched_at,
        })
    };
    Ok([snapshot(0)?, snapshot(1)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::http::OfflineTransport;
    use chrono::TimeZone;

    fn body(temps: &[f64]) -> String {
        let times: Vec<String> = (0..temps.len()).map(|h| format!("2023-05-16T{h:02}:00")).collect();
        let k = temps.len();
        serde_json::json!({
            "hourly": {
                "time": times,
                "temperature_2m": temps,
                "wind_speed_10m": vec![10.0; k],
                "cloud_cover": vec![40.0; k],
                "relative_humidity_2m": vec![60.0; k],
                "dew_point_2m": vec![20.0; k],
            }
        })
        .to_string()
    }

    struct Fixed(String);

    impl WeatherClient for Fixed {
        fn hourly(&self, _: f64, _: f64, _: NaiveDate, _: NaiveDate) -> Result<WeatherPayload, SourceError> {
            Ok(WeatherPayload {
                body: self.0.clone(),
                fetched_at: Utc.with_ymd_and_hms(2023, 5, 16, 0, 0, 0).unwrap(),
            })
        }
    }

    fn windows(a: (u32, u32), b: (u32, u32)) -> [TimeWindow; 2] {
        let t = |h| Utc.with_ymd_and_hms(2023, 5, 16, h, 0, 0).unwrap();
        [
            TimeWindow { start: t(a.0), end: t(a.1) },
            TimeWindow { start: t(b.0), end: t(b.1) },
        ]
    }

    #[test]
    fn constants_and_mean() {
        let mut temps = vec![25.0; 24];
        temps[14] = 30.0;
        temps[15] = 32.0;
        let [a, b] = fetch_innings_weather(26.8, 81.0, &windows((14, 16), (18, 20)), &Fixed(body(&temps))).unwrap();
        assert_eq!(a.temperature_c, 31.0);
        assert_eq!(b.temperature_c, 25.0);
        assert_eq!((a.cloud_cover_pct, a.humidity_pct, a.dew_point_c), (40.0, 60.0, 20.0));
        assert_eq!(b.innings_index, 2);
    }

    #[test]
    fn outside_horizon() {
        let err = fetch_innings_weather(26.8, 81.0, &windows((1, 2), (22, 23)), &Fixed(body(&[20.0; 10]))).unwrap_err();
        assert!(matches!(err, SourceError::OutsideHorizon { innings: 2 }));
    }

    #[test]
    fn bad_inputs() {
        let f = Fixed(body(&[20.0; 24]));
        assert!(fetch_innings_weather(95.0, 0.0, &windows((1, 2), (3, 4)), &f).is_err());
        assert!(fetch_innings_weather(0.0, 0.0, &windows((3, 4), (1, 2)), &f).is_err());
    }

    #[test]
    fn missing_fixture_and_offline_live() {
        let dir = tempfile::tempdir().unwrap();
        let w = windows((14, 16), (17, 19));
        let fx = FixtureWeather::new(dir.path(), Utc::now());
        assert!(matches!(
            fetch_innings_weather(1.0, 2.0, &w, &fx),
            Err(SourceError::MissingFixture { kind: "weather", .. })
        ));
        let live = LiveWeather::new(Arc::new(OfflineTransport), LiveWeather::DEFAULT_URL)
            .with_retry(RetryPolicy::no_delay(0));
        assert!(matches!(fetch_innings_weather(1.0, 2.0, &w, &live), Err(SourceError::Http(_))));
    }

    #[test]
    fn recording_writes_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let rec = RecordingWeather::new(Fixed(body(&[21.0; 24])), dir.path());
        let w = windows((14, 16), (17, 19));
        let live = fetch_innings_weather(1.0, 2.0, &w, &rec).unwrap();
        let replay = fetch_innings_weather(1.0, 2.0, &w, &FixtureWeather::new(dir.path(), live[0].fetched_at)).unwrap();
        assert_eq!(live, replay);
    }
}
