//! Myopic arbitrarily varying channels.

mod capacity;
mod file;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::math::StochasticMatrix;

pub use capacity::{blahut_arimoto, channel_capacity_no_adversary, Capacity};
pub use file::{load_channel, parse_channel, save_channel, to_channel_string, ChannelSpecFile};

/// Storage index of the no-adversary state ∅.
pub const NULL_STATE: usize = 0;

/// Symbol names for each alphabet. `s[0]` names the no-adversary state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alphabets {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
    pub s: Vec<String>,
}

impl Alphabets {
    /// Decimal symbol names, with `"none"` for the no-adversary state.
    pub fn numbered(x: usize, y: usize, z: usize, s: usize) -> Self {
        let names = |k: usize| (0..k).map(|i| i.to_string()).collect::<Vec<_>>();
        let mut states = vec!["none".to_string()];
        states.extend((1..s).map(|i| format!("s{i}")));
        Self {
            x: names(x),
            y: names(y),
            z: names(z),
            s: states,
        }
    }
}

/// A pair of channels: `W(y|x,s)` to the receiver and `U(z|x)` to the adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MyopicAvc {
    pub name: String,
    pub alphabets: Alphabets,
    pub parameters: BTreeMap<String, f64>,
    w: Vec<StochasticMatrix>,
    u: StochasticMatrix,
}

impl MyopicAvc {
    /// `w[s]` maps X to Δ(Y); `w[0]` is the no-adversary channel.
    pub fn new(w: Vec<StochasticMatrix>, u: StochasticMatrix) -> Result<Self> {
        let first = w
            .first()
            .ok_or_else(|| out_of_range("w", "at least the no-adversary state is required"))?;
        let (xs, ys) = (first.in_size(), first.out_size());
        for m in &w {
            if m.in_size() != xs {
                return Err(Error::DimensionMismatch {
                    expected: xs,
                    actual: m.in_size(),
                });
            }
            if m.out_size() != ys {
                return Err(Error::DimensionMismatch {
                    expected: ys,
                    actual: m.out_size(),
                });
            }
        }
        if u.in_size() != xs {
            return Err(Error::DimensionMismatch {
                expected: xs,
                actual: u.in_size(),
            });
        }
        let alphabets = Alphabets::numbered(xs, ys, u.out_size(), w.len());
        Ok(Self {
            name: String::new(),
            alphabets,
            parameters: BTreeMap::new(),
            w,
            u,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_alphabets(mut self, alphabets: Alphabets) -> Result<Self> {
        let dims = [
            ("alphabets.x", alphabets.x.len(), self.x_size()),
            ("alphabets.y", alphabets.y.len(), self.y_size()),
            ("alphabets.z", alphabets.z.len(), self.z_size()),
            ("alphabets.s", alphabets.s.len(), self.s_size()),
        ];
        for (field, got, want) in dims {
            if got != want {
                return Err(Error::Config {
                    field: field.into(),
                    detail: format!("{got} names for an alphabet of size {want}"),
                });
            }
        }
        self.alphabets = alphabets;
        Ok(self)
    }

    pub fn x_size(&self) -> usize {
        self.u.in_size()
    }

    pub fn y_size(&self) -> usize {
        self.w[0].out_size()
    }

    pub fn z_size(&self) -> usize {
        self.u.out_size()
    }

    pub fn s_size(&self) -> usize {
        self.w.len()
    }

    pub fn null_state(&self) -> usize {
        NULL_STATE
    }

    /// The channel `X → Y` under state `s`.
    pub fn w(&self, s: usize) -> &StochasticMatrix {
        &self.w[s]
    }

    pub fn w_all(&self) -> &[StochasticMatrix] {
        &self.w
    }

    /// `W(y|x,s)`.
    pub fn w_prob(&self, y: usize, x: usize, s: usize) -> f64 {
        self.w[s].get(x, y)
    }

    pub fn u(&self) -> &StochasticMatrix {
        &self.u
    }

    pub fn no_adversary(&self) -> &StochasticMatrix {
        &self.w[NULL_STATE]
    }
}

/// `W(·|·,∅)`.
pub fn no_adversary_channel(avc: &MyopicAvc) -> StochasticMatrix {
    avc.no_adversary().clone()
}

/// Binary symmetric channel with crossover `p`.
pub fn bsc(p: f64) -> Result<StochasticMatrix> {
    check_unit("p", p)?;
    StochasticMatrix::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(out_of_range(name, format!("{v} not in [0,1]")))
    }
}

/// The r-overwritable BSC(p) main channel paired with a BEC(u) adversary view.
///
/// X = Y = {0,1}, Z = {0,1,E}, S = {∅,0,1}. Under ∅ the main channel is BSC(p).
/// State `s = x` delivers `x`; state `s = 1−x` delivers `x` w.p. `1−r` and flips
/// it w.p. `r`. The adversary sees `x` w.p. `1−u` and an erasure otherwise.
pub fn make_r_ow_bsc_bec(p: f64, r: f64, u: f64) -> Result<MyopicAvc> {
    check_unit("p", p)?;
    check_unit("r", r)?;
    check_unit("u", u)?;
    let null = bsc(p)?;
    // rows indexed by x; state value v ∈ {0,1}
    let state = |v: usize| {
        StochasticMatrix::new(
            (0..2)
                .map(|x| {
                    if x == v {
                        let mut row = vec![0.0; 2];
                        row[x] = 1.0;
                        row
                    } else {
                        let mut row = vec![0.0; 2];
                        row[x] = 1.0 - r;
                        row[1 - x] = r;
                        row
                    }
                })
                .collect(),
        )
    };
    let bec = StochasticMatrix::new(vec![vec![1.0 - u, 0.0, u], vec![0.0, 1.0 - u, u]])?;
    let mut avc = MyopicAvc::new(vec![null, state(0)?, state(1)?], bec)?
        .with_name(format!("r-ow BSC({p}) / BEC({u}), r={r}"))
        .with_alphabets(Alphabets {
            x: vec!["0".into(), "1".into()],
            y: vec!["0".into(), "1".into()],
            z: vec!["0".into(), "1".into(), "E".into()],
            s: vec!["none".into(), "0".into(), "1".into()],
        })?;
    avc.parameters.insert("p".into(), p);
    avc.parameters.insert("r".into(), r);
    avc.parameters.insert("u".into(), u);
    Ok(avc)
}
