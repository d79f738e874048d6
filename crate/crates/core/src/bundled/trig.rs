//! Sine/cosine of an angle in degrees, five seeded mutants, and the
//! relations MR1-MR5 of the worked example.

use std::sync::Arc;

use crate::condition::Condition;
use crate::execution::{MetricsError, MutantSet, Sut, SutAdapter};
use crate::model::{build_mg, Edit, MetamorphicGroup, MetamorphicRelation, OutputRelation, Pick, TestSuite};
use crate::value::{payload, Payload, TestInput, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrigVariant {
    Correct,
    /// Sine in the third quadrant keeps a positive sign.
    SignFlip,
    /// Reduces the angle by a single period instead of normalizing it.
    PeriodError,
    /// Cosine in the fourth quadrant uses the sine formula.
    FlagSwap,
    /// Truncating remainder, so negative angles fall into the wrong branch.
    ClampRemoval,
    /// Always prints 0.
    ConstantOutput,
}

impl TrigVariant {
    pub const MUTANTS: [TrigVariant; 5] = [
        TrigVariant::SignFlip,
        TrigVariant::PeriodError,
        TrigVariant::FlagSwap,
        TrigVariant::ClampRemoval,
        TrigVariant::ConstantOutput,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TrigVariant::Correct => "trig",
            TrigVariant::SignFlip => "sign-flip",
            TrigVariant::PeriodError => "period-error",
            TrigVariant::FlagSwap => "flag-swap",
            TrigVariant::ClampRemoval => "clamp-removal",
            TrigVariant::ConstantOutput => "constant-output",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        std::iter::once(TrigVariant::Correct)
            .chain(Self::MUTANTS)
            .find(|v| v.id() == id)
    }
}

/// Evaluates `flag` ("sine" or "cosine") at `angle` degrees.
pub fn trig(angle: f64, flag: &str, variant: TrigVariant) -> Result<f64, String> {
    let sine = match flag {
        "sine" => true,
        "cosine" => false,
        other => return Err(format!("unknown function `{other}`")),
    };
    if !angle.is_finite() {
        return Err("angle must be finite".into());
    }
    if variant == TrigVariant::ConstantOutput {
        return Ok(0.0);
    }
    let r = match variant {
        TrigVariant::PeriodError if angle >= 360.0 => angle - 360.0,
        TrigVariant::PeriodError if angle < 0.0 => angle + 360.0,
        TrigVariant::PeriodError => angle,
        TrigVariant::ClampRemoval => angle % 360.0,
        _ => angle.rem_euclid(360.0),
    };
    let q = ((r / 90.0).floor() as i64).min(3);
    // First-quadrant kernel: the offset is only meaningful on [0, 90].
    let a = (r - 90.0 * q as f64).clamp(0.0, 90.0).to_radians();
    Ok(match (sine, q) {
        (true, 0) => a.sin(),
        (true, 1) => a.cos(),
        (true, 2) if variant == TrigVariant::SignFlip => a.sin(),
        (true, 2) => -a.sin(),
        (true, _) => -a.cos(),
        (false, 0) => a.cos(),
        (false, 1) => -a.sin(),
        (false, 2) => -a.cos(),
        (false, _) if variant == TrigVariant::FlagSwap => -a.cos(),
        (false, _) => a.sin(),
    })
}

fn read_payload(p: &Payload) -> Result<(f64, String), String> {
    let angle = p
        .get("angle")
        .and_then(Value::as_f64)
        .ok_or("payload needs a numeric `angle`")?;
    let flag = p.get("flag").and_then(Value::as_str).ok_or("payload needs a text `flag`")?;
    Ok((angle, flag.to_owned()))
}

pub struct TrigSut(pub TrigVariant);

impl Sut for TrigSut {
    fn execute(&self, p: &Payload) -> Result<String, String> {
        let (angle, flag) = read_payload(p)?;
        Ok(format!("{}\n", trig(angle, &flag, self.0)?))
    }
}

/// Line-oriented entry point used when the SUT runs as a separate process:
/// angle on the first line, function name on the second.
pub fn trig_main(stdin: &str, variant: TrigVariant) -> Result<String, String> {
    let mut lines = stdin.lines();
    let angle: f64 = lines
        .next()
        .ok_or("missing angle")?
        .trim()
        .parse()
        .map_err(|_| "angle is not a number".to_owned())?;
    let flag = lines.next().ok_or("missing function name")?.trim();
    Ok(format!("{}\n", trig(angle, flag, variant)?))
}

pub fn trig_adapter(variant: TrigVariant) -> SutAdapter {
    SutAdapter::in_process(variant.id(), Arc::new(TrigSut(variant)))
}

pub fn trig_mutant_set() -> MutantSet {
    trig_mutant_set_of(&TrigVariant::MUTANTS).expect("mutant ids are distinct")
}

pub fn trig_mutant_set_of(variants: &[TrigVariant]) -> Result<MutantSet, MetricsError> {
    MutantSet::new(
        trig_adapter(TrigVariant::Correct),
        variants.iter().map(|&v| trig_adapter(v)).collect(),
    )
}

pub fn angle_input(id: &str, angle: impl Into<Value>, flag: &str) -> TestInput {
    TestInput::new(id, payload([("angle", angle.into()), ("flag", Value::from(flag))]))
}

fn is_flag(flag: &str) -> Condition {
    Condition::eq("flag", flag)
}

fn affine(scale: f64, offset: f64) -> Edit {
    Edit::Affine {
        field: "angle".into(),
        scale,
        offset,
    }
}

fn set_flag(flag: &str) -> Edit {
    Edit::Set {
        field: "flag".into(),
        value: flag.into(),
    }
}

fn periodic_pick(anchor: f64, lo: f64, hi: f64, lo_from_source: bool) -> Edit {
    Edit::PeriodicPick {
        field: "angle".into(),
        period: 360.0,
        anchor,
        lo,
        hi,
        lo_from_source,
        step: Some(1.0),
    }
}

fn mod_range(lo: f64, hi: f64) -> Condition {
    Condition::ModRange {
        field: "angle".into(),
        modulus: 360.0,
        lo,
        hi,
    }
}

/// MR1-MR5 with their output classes.
pub fn trig_mrs() -> Vec<MetamorphicRelation> {
    let tol = crate::model::DEFAULT_TOLERANCE;
    vec![
        MetamorphicRelation::template(
            "MR1",
            Condition::Always,
            vec![affine(1.0, 360.0)],
            OutputRelation::Equal { tolerance: tol },
        )
        .with_class("equality"),
        MetamorphicRelation::template(
            "MR2",
            is_flag("sine"),
            vec![affine(-1.0, 0.0)],
            OutputRelation::Negated { tolerance: tol },
        )
        .with_class("negation"),
        MetamorphicRelation::template(
            "MR3",
            Condition::all(vec![is_flag("cosine"), mod_range(90.0, 270.0)]),
            vec![periodic_pick(90.0, 0.0, 180.0, false), set_flag("sine")],
            OutputRelation::LessEq { tolerance: tol },
        )
        .with_class("le"),
        MetamorphicRelation::template(
            "MR4",
            Condition::all(vec![is_flag("cosine"), mod_range(0.0, 180.0)]),
            vec![periodic_pick(0.0, 0.0, 180.0, true)],
            OutputRelation::GreaterEq {
                tolerance: tol,
                bounds: Some([-1.0, 1.0]),
            },
        )
        .with_class("ge-chain"),
        MetamorphicRelation::template(
            "MR5",
            is_flag("cosine"),
            vec![set_flag("sine")],
            OutputRelation::SumOfSquares {
                constant: 1.0,
                tolerance: tol,
            },
        )
        .with_class("sum-of-squares"),
    ]
}

/// Two further relations used by the larger trend fixture: sine symmetry
/// about 90 degrees and the evenness of cosine.
pub fn extra_trig_mrs() -> Vec<MetamorphicRelation> {
    let tol = crate::model::DEFAULT_TOLERANCE;
    vec![
        MetamorphicRelation::template(
            "MR6",
            is_flag("sine"),
            vec![affine(-1.0, 180.0)],
            OutputRelation::Equal { tolerance: tol },
        )
        .with_class("equality"),
        MetamorphicRelation::template(
            "MR7",
            is_flag("cosine"),
            vec![affine(-1.0, 0.0)],
            OutputRelation::Equal { tolerance: tol },
        )
        .with_class("equality"),
    ]
}

/// t1..t4.
pub fn worked_example_inputs() -> Vec<TestInput> {
    vec![
        angle_input("t1", 36, "sine"),
        angle_input("t2", 74, "sine"),
        angle_input("t3", 100, "cosine"),
        angle_input("t4", 24, "cosine"),
    ]
}

/// The six groups, with the MR3/MR4 follow-up angles pinned.
pub fn worked_example_groups(inputs: &[TestInput], mrs: &[MetamorphicRelation]) -> Vec<MetamorphicGroup> {
    let plan: [(&str, &str, &str, Option<f64>); 6] = [
        ("g1", "MR1", "t1", None),
        ("g2", "MR2", "t2", None),
        ("g3", "MR3", "t3", Some(74.0)),
        ("g4", "MR4", "t3", Some(124.0)),
        ("g5", "MR4", "t4", Some(100.0)),
        ("g6", "MR5", "t4", None),
    ];
    plan.iter()
        .map(|&(id, mr, t, pin)| {
            let mr = mrs.iter().find(|m| m.id == mr).expect("MR declared");
            let t = inputs.iter().find(|i| i.id == t).expect("input declared");
            build_mg(id, mr, &[t], pin.map(Pick::Value)).expect("worked example groups are well formed")
        })
        .collect()
}

pub fn worked_example_suite() -> TestSuite {
    let inputs = worked_example_inputs();
    let mrs = trig_mrs();
    let mgs = worked_example_groups(&inputs, &mrs);
    TestSuite { inputs, mrs, mgs }
}
