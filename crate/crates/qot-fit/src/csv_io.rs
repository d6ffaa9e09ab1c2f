use crate::fit::{ChannelFit, FittedCoeffs};
use crate::FitError;
use std::path::Path;

const HEADER: [&str; 8] = ["channel_index", "f_k", "alpha_k", "alpha_f", "alpha_b", "C_f", "C_b", "rms_db"];

impl FittedCoeffs {
    /// CSV with a one-line `#` metadata header carrying L, P_f, P_b and f̂.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!(
            "# span_length_km={},p_f_mw={},p_b_mw={},f_hat_thz={}\n",
            self.span_length_km, self.p_f_mw, self.p_b_mw, self.f_hat_thz
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for c in &self.channels {
            let row = [
                c.channel.to_string(),
                c.frequency_thz.to_string(),
                c.alpha.to_string(),
                c.alpha_f.to_string(),
                c.alpha_b.to_string(),
                c.c_f.to_string(),
                c.c_b.to_string(),
                c.rms_db.to_string(),
            ];
            w.write_record(&row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8"));
        out
    }

    pub fn from_csv_str(text: &str, ceiling_db: f64) -> Result<Self, FitError> {
        let (meta, body) = text
            .split_once('\n')
            .filter(|(m, _)| m.starts_with('#'))
            .ok_or_else(|| FitError::Format("missing '#' metadata line".into()))?;
        let get = |key: &str| -> Result<f64, FitError> {
            meta.trim_start_matches('#')
                .split(',')
                .filter_map(|kv| kv.trim().split_once('='))
                .find(|(k, _)| *k == key)
                .ok_or_else(|| FitError::Format(format!("metadata key {key} missing")))?
                .1
                .parse()
                .map_err(|_| FitError::Format(format!("metadata key {key} is not a number")))
        };
        let span = get("span_length_km")?;
        let p_f = get("p_f_mw")?;
        let p_b = get("p_b_mw")?;
        let f_hat = get("f_hat_thz")?;
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let headers = r.headers()?.clone();
        if headers.iter().ne(HEADER) {
            return Err(FitError::Format(format!("unexpected columns {headers:?}")));
        }
        let mut channels = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64, FitError> {
                rec[i].trim().parse().map_err(|_| FitError::Format(format!("bad number {:?}", &rec[i])))
            };
            let fk = num(1)?;
            let (alpha_f, alpha_b, c_f, c_b) = (num(3)?, num(4)?, num(5)?, num(6)?);
            let rms_db = num(7)?;
            let df = fk - f_hat;
            channels.push(ChannelFit {
                channel: rec[0].trim().parse().map_err(|_| FitError::Format("bad channel index".into()))?,
                frequency_thz: fk,
                alpha: num(2)?,
                alpha_f,
                alpha_b,
                c_f,
                c_b,
                t_f: FittedCoeffs::t_from_c(p_f, c_f, df, alpha_f),
                t_b: FittedCoeffs::t_from_c(p_b, c_b, df, alpha_b),
                rms_db,
                within_ceiling: rms_db <= ceiling_db,
            });
        }
        Ok(Self { span_length_km: span, p_f_mw: p_f, p_b_mw: p_b, f_hat_thz: f_hat, channels })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), FitError> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>, ceiling_db: f64) -> Result<Self, FitError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?, ceiling_db)
    }
}
