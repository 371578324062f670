use super::{LoadScenario, ScenarioLabel};
use crate::error::{Error, Result};
use crate::network::NetworkModel;

/// Scales the demand of `buses` (ids) at `hour` by `scale`.
///
/// The result is labelled manual and is not confined to the variation
/// polytope.
pub fn apply_laa(model: &NetworkModel, buses: &[usize], hour: usize, scale: f64) -> Result<LoadScenario> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::Validation(format!("attack scale {scale} must be a non-negative number")));
    }
    if buses.is_empty() {
        return Err(Error::Validation("attack needs at least one bus".into()));
    }
    if hour >= model.horizon() {
        return Err(Error::Validation(format!(
            "attack hour {hour} outside the horizon of {} hours",
            model.horizon()
        )));
    }
    let mut s = LoadScenario::zero(model, ScenarioLabel::Manual);
    for &id in buses {
        let i = model
            .bus_index(id)
            .ok_or_else(|| Error::Validation(format!("attack targets unknown bus {id}")))?;
        let bus = &model.buses[i];
        s.var_p[i][hour] = (scale - 1.0) * bus.load_p[hour];
        s.var_q[i][hour] = (scale - 1.0) * bus.load_q[hour];
    }
    Ok(s)
}
