use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use chrono::Utc;
use rust_decimal::Decimal;

use crate::orchestrate::ExecutorRegistry;
use crate::value::Timestamp;

/// Linear unit conversions `to = from * factor + offset`, usable in both directions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnitConversions {
    table: BTreeMap<(String, String), (Decimal, Decimal)>,
}

impl UnitConversions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, from: &str, to: &str, factor: Decimal, offset: Decimal) -> &mut Self {
        assert!(!factor.is_zero(), "conversion factor must be non-zero");
        self.table.insert((from.to_string(), to.to_string()), (factor, offset));
        self
    }

    /// Converts `magnitude` from `from` to `to`; `None` when no conversion is registered.
    pub fn convert(&self, magnitude: Decimal, from: &str, to: &str) -> Option<Decimal> {
        if from == to {
            return Some(magnitude);
        }
        if let Some((factor, offset)) = self.table.get(&(from.to_string(), to.to_string())) {
            return magnitude.checked_mul(*factor)?.checked_add(*offset);
        }
        let (factor, offset) = self.table.get(&(to.to_string(), from.to_string()))?;
        magnitude.checked_sub(*offset)?.checked_div(*factor)
    }
}

/// When applicable units count as validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromotionPolicy {
    /// Success evidence units needed, each from a context where the unit is itself applicable.
    pub min_success_evidence: usize,
}

impl Default for PromotionPolicy {
    fn default() -> Self {
        PromotionPolicy { min_success_evidence: 1 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub conversions: UnitConversions,
    pub promotion: PromotionPolicy,
}

pub type Clock = Arc<dyn Fn() -> Timestamp + Send + Sync>;

/// Evaluation settings, the executor registry and a clock.
///
/// The engine holds no unit data: every operation takes the [`UnitStore`](crate::store::UnitStore)
/// it reads (or mutates) explicitly.
#[derive(Clone)]
pub struct Engine {
    pub settings: Settings,
    pub executors: ExecutorRegistry,
    clock: Clock,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Settings::default())
    }
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("settings", &self.settings)
            .field("executors", &self.executors)
            .finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new(settings: Settings) -> Self {
        Engine {
            settings,
            executors: ExecutorRegistry::default(),
            clock: Arc::new(Utc::now),
        }
    }

    pub fn with_executors(mut self, executors: ExecutorRegistry) -> Self {
        self.executors = executors;
        self
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn now(&self) -> Timestamp {
        (self.clock)()
    }
}
