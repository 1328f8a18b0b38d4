pub mod ablate;
pub mod evaluate;
pub mod qerror;
pub mod similarity;
pub mod train;

/// Runs `$body` with `$env` bound to a freshly built environment of the
/// configured kind.
macro_rules! with_env {
    ($cfg:expr, |$env:ident| $body:expr) => {
        match $cfg.env {
            $crate::config::EnvKind::Walker2d => {
                let $env = atd3_env::Walker::new($cfg.walker.clone())?;
                $body
            }
            $crate::config::EnvKind::PointMass1d => {
                let $env = atd3_env::PointMass::new($cfg.pointmass.clone())?;
                $body
            }
        }
    };
}
pub(crate) use with_env;
