use std::fmt;

use nap_amg::Strategy;
use serde::Serialize;

use crate::report::Report;

/// Modeled standard time over modeled time of the executed strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratio {
    pub standard: f64,
    pub executed: f64,
    /// 1.0 when neither side communicates.
    pub ratio: f64,
}

impl Ratio {
    fn new(standard: f64, executed: f64) -> Self {
        let ratio = if executed > 0.0 {
            standard / executed
        } else if standard > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        Ratio {
            standard,
            executed,
            ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSpeedup {
    pub level: usize,
    pub channel: String,
    pub executed: Strategy,
    pub speedup: Ratio,
}

/// Node-aware speedups derived from the performance models. None of these
/// numbers are timings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupTable {
    pub channels: Vec<ChannelSpeedup>,
    /// Indexed by level.
    pub levels: Vec<Ratio>,
    pub aggregate: Ratio,
}

pub fn compare_report(report: &Report) -> SpeedupTable {
    let channels: Vec<ChannelSpeedup> = report
        .level_channels()
        .map(|(level, c)| ChannelSpeedup {
            level,
            channel: c.name.clone(),
            executed: c.executed,
            speedup: Ratio::new(
                c.strategy(Strategy::Standard).model.total,
                c.strategy(c.executed).model.total,
            ),
        })
        .collect();
    let sum = |it: &mut dyn Iterator<Item = &ChannelSpeedup>| {
        let (s, e) = it.fold((0.0, 0.0), |(s, e), c| {
            (s + c.speedup.standard, e + c.speedup.executed)
        });
        Ratio::new(s, e)
    };
    let levels = report
        .levels
        .iter()
        .map(|l| sum(&mut channels.iter().filter(|c| c.level == l.level)))
        .collect();
    let aggregate = sum(&mut channels.iter());
    SpeedupTable {
        channels,
        levels,
        aggregate,
    }
}

impl fmt::Display for SpeedupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "modeled node-aware speedup (model-derived, not measured)")?;
        writeln!(
            f,
            "{:>5}  {:<12} {:<9} {:>12} {:>12} {:>8}",
            "level", "channel", "executed", "T_standard", "T_executed", "ratio"
        )?;
        let row = |f: &mut fmt::Formatter<'_>, l: &str, c: &str, s: &str, r: &Ratio| {
            writeln!(
                f,
                "{:>5}  {:<12} {:<9} {:>12.4e} {:>12.4e} {:>8.3}",
                l, c, s, r.standard, r.executed, r.ratio
            )
        };
        for c in &self.channels {
            row(f, &c.level.to_string(), &c.channel, c.executed.name(), &c.speedup)?;
        }
        for (l, r) in self.levels.iter().enumerate() {
            row(f, &l.to_string(), "all", "", r)?;
        }
        row(f, "all", "all", "", &self.aggregate)
    }
}
