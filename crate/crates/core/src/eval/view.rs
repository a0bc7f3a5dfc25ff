use std::collections::BTreeSet;

use crate::id::UnitId;
use crate::unit::{Assertion, ContextUnit};

/// A situation context seen through an optional overlay of assertions.
///
/// Overlay assertions shadow the context's current value for their key regardless of timestamp;
/// among overlay entries for one key the last one wins. The context itself is never modified.
#[derive(Debug, Clone, Copy)]
pub struct SituationView<'a> {
    context: &'a ContextUnit,
    overlay: &'a [Assertion],
}

impl<'a> SituationView<'a> {
    pub fn new(context: &'a ContextUnit) -> Self {
        SituationView { context, overlay: &[] }
    }

    pub fn with_overlay(context: &'a ContextUnit, overlay: &'a [Assertion]) -> Self {
        SituationView { context, overlay }
    }

    pub fn context_id(&self) -> &'a UnitId {
        &self.context.base.id
    }

    pub fn current(&self, subject: &str, attribute: &str) -> Option<&'a Assertion> {
        self.overlay
            .iter()
            .rev()
            .find(|a| a.subject == subject && a.attribute == attribute)
            .or_else(|| self.context.current(subject, attribute))
    }

    /// Current assertions for `attribute` across all subjects, ordered by subject.
    pub fn current_with_attribute(&self, attribute: &str) -> Vec<&'a Assertion> {
        let subjects: BTreeSet<&str> = self
            .overlay
            .iter()
            .chain(&self.context.assertions)
            .filter(|a| a.attribute == attribute)
            .map(|a| a.subject.as_str())
            .collect();
        subjects
            .into_iter()
            .filter_map(|s| self.current(s, attribute))
            .collect()
    }
}
