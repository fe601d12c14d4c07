//! The car alarm system (CAS) model used as the shipped benchmark.
//!
//! Actions follow the CAS state machine:
//!
//! | `aState` | state             |
//! |----------|-------------------|
//! | 0        | Alarm, flash only |
//! | 1        | Alarm, flash and sound |
//! | 2        | Armed             |
//! | 3        | ClosedAndLocked   |
//! | 4        | ClosedAndUnlocked |
//! | 5        | OpenAndLocked     |
//! | 6        | OpenAndUnlocked   |
//! | 7        | SilentAndOpen     |
//!
//! Entry and exit effects of the state machine (`AlarmArmed.SetOn/SetOff`,
//! optical and acoustic alarm on/off) are modelled as output actions. The
//! `from*` variables record which outputs are still pending after a state
//! change; inputs are only enabled once the pending outputs are flushed.
//! Flash and sound are switched in either order, which is the model's
//! non-determinism.
//!
//! `fromArmed`: 1 = SetOff pending after Unlock, 2 = SetOff pending after
//! Open, 3 = alarm outputs pending, 4 = alarm fully on.
//! `fromAlarm`: 1 = FlashOff pending after the flash timeout, 2 = sound
//! already off, 3 = FlashOff/SoundOff pending after Unlock, 4 = SoundOff
//! pending after the 30 s timeout.

use std::fmt;
use std::str::FromStr;

/// The `after` wait times, before scaling.
pub const AFTER_CONSTANTS: [i64; 3] = [20, 30, 270];

/// Upper bound of the `int` type, before scaling.
pub const INT_UPPER: i64 = 270;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixture {
    Cas1,
    Cas10,
    Cas100,
    Cas1000,
    /// CAS_1 with the after-parameter domain shrunk to `0..30`.
    CasReduced,
}

impl Fixture {
    pub const ALL: [Fixture; 5] =
        [Fixture::Cas1, Fixture::Cas10, Fixture::Cas100, Fixture::Cas1000, Fixture::CasReduced];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Cas1 => "cas_1",
            Fixture::Cas10 => "cas_10",
            Fixture::Cas100 => "cas_100",
            Fixture::Cas1000 => "cas_1000",
            Fixture::CasReduced => "cas_reduced",
        }
    }

    pub fn source(self) -> String {
        match self {
            Fixture::Cas1 => cas_source(1, INT_UPPER),
            Fixture::Cas10 => cas_source(10, INT_UPPER * 10),
            Fixture::Cas100 => cas_source(100, INT_UPPER * 100),
            Fixture::Cas1000 => cas_source(1000, INT_UPPER * 1000),
            Fixture::CasReduced => cas_source(1, 30),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown fixture `{s}` (expected cas_1, cas_10, cas_100, cas_1000 or cas_reduced)"))
    }
}

/// CAS text with the after-parameters multiplied by `scale` and the `int`
/// type bounded by `0..int_upper`.
pub fn cas_source(scale: i64, int_upper: i64) -> String {
    let [t20, t30, t270] = AFTER_CONSTANTS.map(|c| c * scale);
    TEMPLATE
        .replace("{INT_UPPER}", &int_upper.to_string())
        .replace("{T20}", &t20.to_string())
        .replace("{T30}", &t30.to_string())
        .replace("{T270}", &t270.to_string())
}

const TEMPLATE: &str = r"% Car alarm system.
type(enum_State, X) :- X in 0..7.
type(int, X) :- X in 0..{INT_UPPER}.
type(enum_From, X) :- X in 0..4.
type(bool, X) :- X in 0..1.
var([aState], enum_State).
var([fromAlarm, fromArmed], enum_From).
var([fromClosedAndLocked_OR_fromSilentAndOpen, flashOn, soundOn], bool).
state_def([aState, fromAlarm, fromArmed, fromClosedAndLocked_OR_fromSilentAndOpen, flashOn, soundOn]).

init([6, 0, 0, 0, 0, 0]).

as :-
  actions (
    'after'(Wait_time)::(true) =>
    (
       ((Wait_time #= {T20} #/\ aState #= 3) =>
            (aState := 2; fromClosedAndLocked_OR_fromSilentAndOpen := 1))
      []
       ((Wait_time #= {T30} #/\ aState #= 1 #/\ fromArmed #= 4) =>
            (aState := 0; fromAlarm := 4; fromArmed := 0))
      []
       ((Wait_time #= {T270} #/\ aState #= 0 #/\ fromAlarm #= 2) =>
            (aState := 7; fromAlarm := 1; fromArmed := 0))
    ),
    'Lock'::(true) =>
    (
       ((aState #= 6 #/\ fromAlarm #= 0) => (aState := 5))
      []
       ((aState #= 4 #/\ fromArmed #\= 1) => (aState := 3; fromArmed := 0))
    ),
    'Unlock'::(true) =>
    (
       ((aState #= 5) => (aState := 6))
      []
       ((aState #= 3) => (aState := 4))
      []
       ((aState #= 2 #/\ fromClosedAndLocked_OR_fromSilentAndOpen #= 0) =>
            (aState := 4; fromArmed := 1))
      []
       ((aState #= 1 #/\ fromArmed #= 4) => (aState := 6; fromAlarm := 3; fromArmed := 0))
      []
       ((aState #= 0 #/\ fromAlarm #= 2) => (aState := 6; fromAlarm := 3))
      []
       ((aState #= 7 #/\ fromAlarm #= 0) => (aState := 6))
    ),
    'Close'::(true) =>
    (
       ((aState #= 6 #/\ fromAlarm #= 0) => (aState := 4))
      []
       ((aState #= 5) => (aState := 3))
      []
       ((aState #= 7 #/\ fromAlarm #= 0) =>
            (aState := 2; fromClosedAndLocked_OR_fromSilentAndOpen := 1))
    ),
    'Open'::(true) =>
    (
       ((aState #= 4 #/\ fromArmed #\= 1) => (aState := 6))
      []
       ((aState #= 3) => (aState := 5))
      []
       ((aState #= 2 #/\ fromClosedAndLocked_OR_fromSilentAndOpen #= 0) =>
            (aState := 1; fromArmed := 2))
    ),
    'AlarmArmed_SetOn'::(true) =>
    (
       ((aState #= 2 #/\ fromClosedAndLocked_OR_fromSilentAndOpen #= 1) =>
            (fromClosedAndLocked_OR_fromSilentAndOpen := 0))
    ),
    'AlarmArmed_SetOff'::(true) =>
    (
       ((aState #= 4 #/\ fromArmed #= 1) => (fromArmed := 0))
      []
       ((aState #= 1 #/\ fromArmed #= 2) => (fromArmed := 3))
    ),
    'FlashOn'::(true) =>
    (
       ((aState #= 1 #/\ fromArmed #= 3 #/\ flashOn #= 0 #/\ soundOn #= 0) => (flashOn := 1))
      []
       ((aState #= 1 #/\ fromArmed #= 3 #/\ flashOn #= 0 #/\ soundOn #= 1) =>
            (flashOn := 1; fromArmed := 4))
    ),
    'SoundOn'::(true) =>
    (
       ((aState #= 1 #/\ fromArmed #= 3 #/\ soundOn #= 0 #/\ flashOn #= 0) => (soundOn := 1))
      []
       ((aState #= 1 #/\ fromArmed #= 3 #/\ soundOn #= 0 #/\ flashOn #= 1) =>
            (soundOn := 1; fromArmed := 4))
    ),
    'FlashOff'::(true) =>
    (
       ((aState #= 6 #/\ fromAlarm #= 3 #/\ flashOn #= 1 #/\ soundOn #= 1) => (flashOn := 0))
      []
       ((aState #= 6 #/\ fromAlarm #= 3 #/\ flashOn #= 1 #/\ soundOn #= 0) =>
            (flashOn := 0; fromAlarm := 0))
      []
       ((aState #= 7 #/\ fromAlarm #= 1) => (flashOn := 0; fromAlarm := 0))
    ),
    'SoundOff'::(true) =>
    (
       ((aState #= 0 #/\ fromAlarm #= 4) => (soundOn := 0; fromAlarm := 2))
      []
       ((aState #= 6 #/\ fromAlarm #= 3 #/\ soundOn #= 1 #/\ flashOn #= 1) => (soundOn := 0))
      []
       ((aState #= 6 #/\ fromAlarm #= 3 #/\ soundOn #= 1 #/\ flashOn #= 0) =>
            (soundOn := 0; fromAlarm := 0))
    )
  ),
  dood (
     'Lock'
  [] [X:int]:'after'(X)
  [] 'Unlock'
  [] 'Close'
  [] 'Open'
  [] 'AlarmArmed_SetOn'
  [] 'AlarmArmed_SetOff'
  [] 'FlashOn'
  [] 'FlashOff'
  [] 'SoundOn'
  [] 'SoundOff'
  ).
";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    #[test]
    fn every_fixture_parses() {
        for f in Fixture::ALL {
            let m = parse_model(&f.source()).unwrap_or_else(|e| panic!("{f}: {e}"));
            assert_eq!(m.init, vec![6, 0, 0, 0, 0, 0]);
            assert_eq!(m.actions.len(), 11);
        }
    }

    #[test]
    fn scaled_constants() {
        let s = Fixture::Cas10.source();
        for c in ["#= 200 ", "#= 300 ", "#= 2700 ", "0..2700."] {
            assert!(s.contains(c), "missing {c}");
        }
        let s = Fixture::Cas1000.source();
        for c in ["#= 20000 ", "#= 30000 ", "#= 270000 ", "0..270000."] {
            assert!(s.contains(c), "missing {c}");
        }
        let s = Fixture::Cas1.source();
        for c in ["#= 20 ", "#= 30 ", "#= 270 ", "0..270."] {
            assert!(s.contains(c), "missing {c}");
        }
    }

    #[test]
    fn names_round_trip() {
        for f in Fixture::ALL {
            assert_eq!(f.name().parse::<Fixture>().unwrap(), f);
        }
        assert!("cas_2".parse::<Fixture>().is_err());
    }
}
