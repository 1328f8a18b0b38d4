use std::io::Write;

use crate::error::Result;
use crate::walker::{DefaultRewardBreakdown, OBS_DIM, ACTION_DIM};

/// Per-step walker trace: step index, observation, action, reward
/// components and terminal flag.
pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        let mut header = vec!["step".to_string()];
        header.extend((0..OBS_DIM).map(|i| format!("obs_{i}")));
        header.extend((0..ACTION_DIM).map(|i| format!("action_{i}")));
        header.extend(
            ["r_alive", "r_progress", "r_effort", "r_limit", "r_collision", "terminal"]
                .map(String::from),
        );
        inner.write_record(&header)?;
        Ok(Self { inner })
    }

    pub fn write_row(
        &mut self,
        step: usize,
        observation: &[f64],
        action: &[f64],
        reward: &DefaultRewardBreakdown,
        terminal: bool,
    ) -> Result<()> {
        let mut row = vec![step.to_string()];
        row.extend(observation.iter().map(f64::to_string));
        row.extend(action.iter().map(f64::to_string));
        row.extend(reward.as_array().iter().map(f64::to_string));
        row.push(u8::from(terminal).to_string());
        self.inner.write_record(&row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner
            .into_inner()
            .map_err(|e| crate::error::EnvError::Io(e.into_error()))
    }
}
