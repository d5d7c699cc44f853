use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::ParamFn;

/// Segre type of a rigid 6-dimensional h-space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HSpaceType {
    T2211,
    T321,
    T33,
    T411,
    T51,
}

/// Which parameter set drives a Jordan block's eigenvalue.
///
/// `First` uses (ε, θ) and eigenvalue ε·x^last; `Second` uses (ε̃, ω) and
/// ε̃·x^last + a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "role")]
pub enum EigenRole {
    Block { branch: Branch },
    Simple,
}

/// One Jordan block in canonical coordinates; `start` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub start: usize,
    pub size: usize,
    #[serde(flatten)]
    pub role: EigenRole,
}

impl BlockLayout {
    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.start + self.size - 1
    }

    pub fn last(&self) -> usize {
        self.start + self.size - 1
    }
}

const fn block(start: usize, size: usize, branch: Branch) -> BlockLayout {
    BlockLayout {
        start,
        size,
        role: EigenRole::Block { branch },
    }
}

const fn simple(index: usize) -> BlockLayout {
    BlockLayout {
        start: index,
        size: 1,
        role: EigenRole::Simple,
    }
}

const LAYOUT_2211: [BlockLayout; 4] = [
    block(1, 2, Branch::First),
    block(3, 2, Branch::Second),
    simple(5),
    simple(6),
];
const LAYOUT_321: [BlockLayout; 3] = [
    block(1, 3, Branch::First),
    block(4, 2, Branch::Second),
    simple(6),
];
const LAYOUT_33: [BlockLayout; 2] = [block(1, 3, Branch::First), block(4, 3, Branch::Second)];
const LAYOUT_411: [BlockLayout; 3] = [block(1, 4, Branch::First), simple(5), simple(6)];
const LAYOUT_51: [BlockLayout; 2] = [block(1, 5, Branch::First), simple(6)];

impl HSpaceType {
    pub const ALL: [HSpaceType; 5] = [
        HSpaceType::T2211,
        HSpaceType::T321,
        HSpaceType::T33,
        HSpaceType::T411,
        HSpaceType::T51,
    ];

    pub fn layout(self) -> &'static [BlockLayout] {
        match self {
            HSpaceType::T2211 => &LAYOUT_2211,
            HSpaceType::T321 => &LAYOUT_321,
            HSpaceType::T33 => &LAYOUT_33,
            HSpaceType::T411 => &LAYOUT_411,
            HSpaceType::T51 => &LAYOUT_51,
        }
    }

    pub fn has_second_branch(self) -> bool {
        matches!(self, HSpaceType::T2211 | HSpaceType::T321 | HSpaceType::T33)
    }

    pub fn simple_roots(self) -> &'static [usize] {
        match self {
            HSpaceType::T2211 | HSpaceType::T411 => &[5, 6],
            HSpaceType::T321 | HSpaceType::T51 => &[6],
            HSpaceType::T33 => &[],
        }
    }

    /// Indices i whose sign e_i appears in the line element.
    pub fn sign_indices(self) -> &'static [usize] {
        match self {
            HSpaceType::T2211 => &[2, 4, 5, 6],
            HSpaceType::T321 => &[3, 5, 6],
            HSpaceType::T33 => &[3, 6],
            HSpaceType::T411 => &[4, 5, 6],
            HSpaceType::T51 => &[5, 6],
        }
    }

    /// Upper-triangle (1-based) entries the canonical line element can make nonzero.
    pub fn nonzero_pattern(self) -> &'static [(usize, usize)] {
        match self {
            HSpaceType::T2211 => &[(1, 2), (2, 2), (3, 4), (4, 4), (5, 5), (6, 6)],
            HSpaceType::T321 => &[(1, 3), (2, 2), (2, 3), (3, 3), (4, 5), (5, 5), (6, 6)],
            HSpaceType::T33 => &[
                (1, 3),
                (2, 2),
                (2, 3),
                (3, 3),
                (4, 6),
                (5, 5),
                (5, 6),
                (6, 6),
            ],
            HSpaceType::T411 => &[
                (1, 4),
                (2, 3),
                (2, 4),
                (3, 3),
                (3, 4),
                (4, 4),
                (5, 5),
                (6, 6),
            ],
            HSpaceType::T51 => &[
                (1, 5),
                (2, 4),
                (2, 5),
                (3, 3),
                (3, 4),
                (3, 5),
                (4, 5),
                (5, 5),
                (6, 6),
            ],
        }
    }

    /// Upper-triangle pairs (α ≤ β, 1-based) with g_αβ identically zero.
    pub fn zero_pattern(self) -> Vec<(usize, usize)> {
        let nz = self.nonzero_pattern();
        (1..=6)
            .flat_map(|i| (i..=6).map(move |j| (i, j)))
            .filter(|p| !nz.contains(p))
            .collect()
    }
}

impl fmt::Display for HSpaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HSpaceType::T2211 => "[2211]",
            HSpaceType::T321 => "[321]",
            HSpaceType::T33 => "[33]",
            HSpaceType::T411 => "[411]",
            HSpaceType::T51 => "[51]",
        };
        f.write_str(s)
    }
}

/// Last simple-root factor of the [321] line element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SixthFactor321 {
    /// e₆(εx³ − f₆)³(f₅ − f₆)²
    #[default]
    MixedCube,
    /// e₆(f₅ − f₆)²(f₅ − f₆)³, as printed.
    RepeatedFactor,
}

/// Coordinate entering Ã = ε̃x^k + ω(x⁶) in the [33] line element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondBlockA33 {
    #[default]
    UsesX5,
    UsesX4,
}

/// How the trailing "3A dx³dx⁴ + 12εx²A(dx⁴)²" terms of the [411] line
/// element attach to the block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail411 {
    /// Block prefactor times e₂ = ((f₅−εx⁴)(f₆−εx⁴))⁻¹, i.e. the N² term of
    /// P·h·(I − Σ₁N + e₂N²); the (εx²)²Σ₁ term enters with a minus sign.
    #[default]
    SecondSymmetric,
    /// Inside the braces, multiplied by the block prefactor.
    InsideBlock,
    /// Outside the braces, without prefactor.
    OutsideBlock,
}

/// Selected readings for the line-element formulas whose printed form is
/// ambiguous. Defaults are the frozen calibration outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Readings {
    pub t321_sixth_factor: SixthFactor321,
    pub t33_second_block_a: SecondBlockA33,
    pub t411_tail: Tail411,
}

/// Full parameterization of one canonical metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HSpaceSpec {
    #[serde(rename = "type")]
    pub kind: HSpaceType,
    pub eps: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_tilde: Option<u8>,
    /// Offset of the second block eigenvalue; zero when absent.
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub signs: BTreeMap<usize, i64>,
    pub theta: ParamFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<ParamFn>,
    #[serde(rename = "f")]
    pub f_simple: BTreeMap<usize, ParamFn>,
    #[serde(default)]
    pub relax_eps_constraint: bool,
    #[serde(default)]
    pub readings: Readings,
}

impl HSpaceSpec {
    /// Spec with all signs +1, θ = ω = 0 and no simple-root functions;
    /// callers fill in the rest.
    pub fn new(kind: HSpaceType, eps: u8) -> Self {
        Self {
            kind,
            eps,
            eps_tilde: kind.has_second_branch().then_some(0),
            a: 0.0,
            signs: BTreeMap::new(),
            theta: ParamFn::constant(0.0),
            omega: kind.has_second_branch().then(|| ParamFn::constant(0.0)),
            f_simple: BTreeMap::new(),
            relax_eps_constraint: false,
            readings: Readings::default(),
        }
    }

    pub fn sign(&self, index: usize) -> f64 {
        self.signs.get(&index).copied().unwrap_or(1) as f64
    }

    pub fn eps_value(&self) -> f64 {
        self.eps as f64
    }

    pub fn eps_tilde_value(&self) -> f64 {
        self.eps_tilde.unwrap_or(0) as f64
    }

    pub fn branch_eps(&self, branch: Branch) -> f64 {
        match branch {
            Branch::First => self.eps_value(),
            Branch::Second => self.eps_tilde_value(),
        }
    }

    pub fn branch_offset(&self, branch: Branch) -> f64 {
        match branch {
            Branch::First => 0.0,
            Branch::Second => self.a,
        }
    }

    pub fn branch_param(&self, branch: Branch) -> &ParamFn {
        match branch {
            Branch::First => &self.theta,
            Branch::Second => self.omega.as_ref().unwrap_or(&ZERO_FN),
        }
    }

    pub fn simple_fn(&self, index: usize) -> &ParamFn {
        self.f_simple.get(&index).unwrap_or(&ZERO_FN)
    }

    /// Jordan blocks of size ≥ 2.
    pub fn jordan_blocks(&self) -> impl Iterator<Item = (BlockLayout, Branch)> + '_ {
        self.kind.layout().iter().filter_map(|b| match b.role {
            EigenRole::Block { branch } => Some((*b, branch)),
            EigenRole::Simple => None,
        })
    }
}

static ZERO_FN: ParamFn = ParamFn::Constant { value: 0.0 };

fn check_flag(field: &str, v: u8) -> Result<()> {
    if v > 1 {
        Err(Error::schema(field, format!("must be 0 or 1, got {v}")))
    } else {
        Ok(())
    }
}

/// Check the parameter constraints of the canonical families; returns the
/// spec unchanged when they hold.
pub fn validate_spec(spec: HSpaceSpec) -> Result<HSpaceSpec> {
    let kind = spec.kind;
    check_flag("eps", spec.eps)?;

    if kind.has_second_branch() {
        let et = spec
            .eps_tilde
            .ok_or_else(|| Error::schema("eps_tilde", format!("required for {kind}")))?;
        check_flag("eps_tilde", et)?;
        if spec.omega.is_none() {
            return Err(Error::schema("omega", format!("required for {kind}")));
        }
        if !spec.relax_eps_constraint && spec.eps == et {
            return Err(Error::EpsEquality { eps: et });
        }
        if et == 0 && spec.a == 0.0 {
            return Err(Error::ZeroOffset);
        }
    } else {
        if spec.eps_tilde.is_some() {
            return Err(Error::schema("eps_tilde", format!("not a parameter of {kind}")));
        }
        if spec.omega.is_some() {
            return Err(Error::schema("omega", format!("not a parameter of {kind}")));
        }
        if spec.a != 0.0 {
            return Err(Error::schema("a", format!("not a parameter of {kind}")));
        }
    }
    if !spec.a.is_finite() {
        return Err(Error::schema("a", "must be finite"));
    }

    let allowed = kind.sign_indices();
    for (&index, &value) in &spec.signs {
        if !allowed.contains(&index) {
            return Err(Error::schema(
                format!("signs.{index}"),
                format!("{kind} has signs for indices {allowed:?}"),
            ));
        }
        if value != 1 && value != -1 {
            return Err(Error::BadSign { index, value });
        }
    }

    let roots = kind.simple_roots();
    for &r in roots {
        if !spec.f_simple.contains_key(&r) {
            return Err(Error::schema(format!("f.{r}"), "missing simple-root function"));
        }
    }
    if let Some(&extra) = spec.f_simple.keys().find(|k| !roots.contains(k)) {
        return Err(Error::schema(
            format!("f.{extra}"),
            format!("{kind} has simple roots {roots:?}"),
        ));
    }

    let mut fns: Vec<(&str, &ParamFn)> = vec![("theta", &spec.theta)];
    if let Some(om) = &spec.omega {
        fns.push(("omega", om));
    }
    for f in spec.f_simple.values() {
        fns.push(("f", f));
    }
    if let Some((name, _)) = fns.iter().find(|(_, f)| !f.is_finite()) {
        return Err(Error::schema(*name, "non-finite parameter"));
    }
    Ok(spec)
}
