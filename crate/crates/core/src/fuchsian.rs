//! The Bolza genus-2 group, Cayley-ball enumeration with displacement
//! pruning, the quotient metric `d_X` on `Gamma \ PSL(2,R)`, and numeric
//! lower bounds for the trace gap `eps_*` and separation constant `sigma_0`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::psl2::{
    displacement, dist_h2, dist_lower, dist_upper, DistanceBracket, GroupElement, PointH2,
};
use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Entrywise tolerance for deduplicating ball elements. Distinct elements of
/// the Bolza group at the radii we enumerate are separated by at least ~1e-4
/// in some entry, while duplicate words agree to ~1e-12.
const DEDUP_TOL: f64 = 1e-9;
/// Cell width of the dedup hash grid; must sit between the duplicate noise
/// and the minimal separation of distinct elements.
const DEDUP_CELL: f64 = 1e-5;

/// A cocompact Fuchsian group given by closed generators, a defining relator
/// word, and the basepoint the enumeration measures displacement from.
#[derive(Debug)]
pub struct FuchsianGroup {
    generators: Vec<GroupElement>,
    relator: Vec<usize>,
    basepoint: PointH2,
}

impl FuchsianGroup {
    /// The Bolza octagon group: `g_0 = ((1+s2, q); (q, 1+s2))` with
    /// `q = sqrt(2 + 2 s2)`, and `g_k = rho_k g_0 rho_k^-1` where `rho_k`
    /// rotates about `i` by `k pi / 4`. Opposite generators are inverse
    /// (`g_{k+4} = g_k^-1`) and the vertex relator
    /// `g_0 g_5 g_2 g_7 g_4 g_1 g_6 g_3` closes the octagon; both facts are
    /// validated at construction and a failure reports the residual so a
    /// wrong rotation offset cannot slip through silently.
    pub fn bolza() -> Result<FuchsianGroup> {
        let p = 1.0 + SQRT_2;
        let q = (2.0 + 2.0 * SQRT_2).sqrt();
        let g0 = GroupElement::canonicalize(p, q, q, p);
        let generators: Vec<GroupElement> = (0..8)
            .map(|k| {
                let rho = GroupElement::rotation(k as f64 * std::f64::consts::FRAC_PI_4);
                rho.compose(&g0).compose(&rho.inverse())
            })
            .collect();
        let relator = vec![0, 5, 2, 7, 4, 1, 6, 3];

        let mut product = GroupElement::IDENTITY;
        for &k in &relator {
            product = product.compose(&generators[k]);
        }
        let residual = product.entry_dist(&GroupElement::IDENTITY);
        if residual > 1e-9 {
            return Err(Error::Construction(format!(
                "relator product deviates from identity by {residual:.3e}; \
                 the side-pairing rotation offset does not close the octagon"
            )));
        }
        for (k, g) in generators.iter().enumerate() {
            if g.trace() <= 2.0 {
                return Err(Error::Construction(format!(
                    "generator {k} is not hyperbolic (trace {})",
                    g.trace()
                )));
            }
            let paired = generators[(k + 4) % 8].entry_dist(&g.inverse());
            if paired > 1e-9 {
                return Err(Error::Construction(format!(
                    "generator {} is not the inverse of generator {k} (deviation {paired:.3e})",
                    (k + 4) % 8
                )));
            }
        }
        Ok(FuchsianGroup {
            generators,
            relator,
            basepoint: PointH2::I,
        })
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn relator(&self) -> &[usize] {
        &self.relator
    }

    pub fn basepoint(&self) -> &PointH2 {
        &self.basepoint
    }

    /// Index of the generator inverse to `k`.
    pub fn inverse_index(&self, k: usize) -> usize {
        (k + 4) % self.generators.len()
    }

    /// Largest basepoint displacement among the generators: the pruning
    /// margin of the ball enumeration is twice this step.
    pub fn max_generator_step(&self) -> f64 {
        self.generators.iter().map(displacement).fold(0.0, f64::max)
    }
}

/// One enumerated group element with its defining word (generator indices)
/// and basepoint displacement `d_H(i, gamma i)`.
#[derive(Debug, Clone)]
pub struct BallElement {
    pub element: GroupElement,
    pub word: Vec<u8>,
    pub displacement: f64,
}

/// Enumeration controls for [`enumerate_ball`].
#[derive(Debug, Clone, Copy)]
pub struct BallParams {
    pub max_word_len: usize,
    /// Include only elements with displacement at most this; `None` keeps
    /// every element up to the word-length limit.
    pub max_displacement: Option<f64>,
    /// Abort enumeration when more than this many nodes have been generated.
    pub max_elements: usize,
}

impl Default for BallParams {
    fn default() -> Self {
        BallParams {
            max_word_len: 3,
            max_displacement: None,
            max_elements: 1_000_000,
        }
    }
}

/// Deduplicated set of group elements, sorted by displacement, with the
/// radius up to which it is certified complete.
#[derive(Debug)]
pub struct FuchsianBall {
    elements: Vec<BallElement>,
    word_length_limit: usize,
    displacement_limit: f64,
    complete_to: f64,
}

/// Spatial-hash dedup: elements are binned by quantized entries and a lookup
/// probes every cell a tolerance-ball around the query can touch.
struct DedupGrid {
    cells: HashMap<[i64; 4], Vec<usize>>,
}

impl DedupGrid {
    fn new() -> Self {
        DedupGrid {
            cells: HashMap::new(),
        }
    }

    fn key_of(g: &GroupElement) -> [i64; 4] {
        [
            (g.a / DEDUP_CELL).floor() as i64,
            (g.b / DEDUP_CELL).floor() as i64,
            (g.c / DEDUP_CELL).floor() as i64,
            (g.d / DEDUP_CELL).floor() as i64,
        ]
    }

    fn contains(&self, g: &GroupElement, nodes: &[BallElement]) -> bool {
        let entries = [g.a, g.b, g.c, g.d];
        let mut lo = [0i64; 4];
        let mut hi = [0i64; 4];
        for i in 0..4 {
            lo[i] = ((entries[i] - DEDUP_TOL) / DEDUP_CELL).floor() as i64;
            hi[i] = ((entries[i] + DEDUP_TOL) / DEDUP_CELL).floor() as i64;
        }
        let mut key = [0i64; 4];
        for k0 in lo[0]..=hi[0] {
            key[0] = k0;
            for k1 in lo[1]..=hi[1] {
                key[1] = k1;
                for k2 in lo[2]..=hi[2] {
                    key[2] = k2;
                    for k3 in lo[3]..=hi[3] {
                        key[3] = k3;
                        if let Some(bucket) = self.cells.get(&key) {
                            if bucket
                                .iter()
                                .any(|&i| nodes[i].element.entry_dist(g) <= DEDUP_TOL)
                            {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, g: &GroupElement, index: usize) {
        self.cells.entry(Self::key_of(g)).or_default().push(index);
    }
}

/// Breadth-first enumeration of reduced words (no `g_k g_{k+4}` backtracking)
/// with displacement pruning.
///
/// When a displacement cap `D` is given, nodes are expanded while their
/// displacement stays within `D + 2 s` (`s` = largest generator step). Any
/// missing element of displacement `<= D` would admit a Dirichlet-domain
/// crossing word whose prefixes all stay within `D + r_v < D + 2 s`
/// (`r_v` = octagon circumradius), so if no in-margin node was cut off by the
/// word-length limit the ball provably contains every element with
/// displacement `<= D` and `complete_to = D`. Otherwise `complete_to = 0`
/// and quotient brackets degrade to hi-only.
pub fn enumerate_ball(group: &FuchsianGroup, params: &BallParams) -> Result<FuchsianBall> {
    let step = group.max_generator_step();
    let include_limit = params.max_displacement.unwrap_or(f64::INFINITY);
    let expand_limit = params
        .max_displacement
        .map(|d| d + 2.0 * step)
        .unwrap_or(f64::INFINITY);

    let mut nodes: Vec<BallElement> = vec![BallElement {
        element: GroupElement::IDENTITY,
        word: Vec::new(),
        displacement: 0.0,
    }];
    let mut grid = DedupGrid::new();
    grid.insert(&GroupElement::IDENTITY, 0);

    let mut truncated_by_length = false;
    let mut frontier: Vec<usize> = vec![0];
    for depth in 0..=params.max_word_len {
        if frontier.is_empty() {
            break;
        }
        if depth == params.max_word_len {
            truncated_by_length = frontier
                .iter()
                .any(|&i| nodes[i].displacement <= expand_limit);
            break;
        }
        let mut next = Vec::new();
        for &idx in &frontier {
            if nodes[idx].displacement > expand_limit {
                continue;
            }
            let parent_word = nodes[idx].word.clone();
            let parent = nodes[idx].element;
            for k in 0..group.generators().len() {
                if let Some(&last) = parent_word.last() {
                    if group.inverse_index(last as usize) == k {
                        continue;
                    }
                }
                let child = parent.compose(&group.generators()[k]);
                let disp = displacement(&child);
                // Neither includable nor expandable: skip without recording.
                // Displacement is a function of the element, so the same
                // element can never re-enter below the margin later.
                if disp > expand_limit {
                    continue;
                }
                if grid.contains(&child, &nodes) {
                    continue;
                }
                if nodes.len() >= params.max_elements {
                    return Err(Error::ResourceCap {
                        count: nodes.len() + 1,
                        cap: params.max_elements,
                    });
                }
                let mut word = parent_word.clone();
                word.push(k as u8);
                grid.insert(&child, nodes.len());
                next.push(nodes.len());
                nodes.push(BallElement {
                    element: child,
                    word,
                    displacement: disp,
                });
            }
        }
        frontier = next;
    }

    let mut elements: Vec<BallElement> = nodes
        .into_iter()
        .filter(|n| n.displacement <= include_limit)
        .collect();
    elements.sort_by(|a, b| {
        a.displacement
            .partial_cmp(&b.displacement)
            .unwrap()
            .then(a.word.len().cmp(&b.word.len()))
            .then(a.word.cmp(&b.word))
    });

    let complete_to = match params.max_displacement {
        Some(d) if !truncated_by_length => d,
        _ => 0.0,
    };

    Ok(FuchsianBall {
        elements,
        word_length_limit: params.max_word_len,
        displacement_limit: include_limit,
        complete_to,
    })
}

impl FuchsianBall {
    pub fn elements(&self) -> &[BallElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn word_length_limit(&self) -> usize {
        self.word_length_limit
    }

    pub fn displacement_limit(&self) -> f64 {
        self.displacement_limit
    }

    /// Radius up to which the ball provably contains every group element.
    pub fn complete_to(&self) -> f64 {
        self.complete_to
    }

    /// Line-oriented cache format: one element per line as
    /// `word a b c d displacement` with 17-significant-digit floats (exact
    /// f64 round trip). The empty word is written `-`.
    pub fn to_cache_string(&self) -> String {
        let mut out = String::new();
        out.push_str("# horolab ball cache\n# schema_version: 1\n");
        let _ = writeln!(out, "# word_length_limit: {}", self.word_length_limit);
        if self.displacement_limit.is_finite() {
            let _ = writeln!(
                out,
                "# displacement_limit: {:.16e}",
                self.displacement_limit
            );
        } else {
            let _ = writeln!(out, "# displacement_limit: inf");
        }
        let _ = writeln!(out, "# complete_to: {:.16e}", self.complete_to);
        for el in &self.elements {
            let word = if el.word.is_empty() {
                "-".to_string()
            } else {
                el.word.iter().map(|k| (b'0' + k) as char).collect()
            };
            let _ = writeln!(
                out,
                "{word} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                el.element.a, el.element.b, el.element.c, el.element.d, el.displacement
            );
        }
        out
    }

    pub fn from_cache_str(text: &str) -> Result<FuchsianBall> {
        let mut word_length_limit = None;
        let mut displacement_limit = None;
        let mut complete_to = None;
        let mut elements = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("word_length_limit:") {
                    word_length_limit = Some(parse_usize(v.trim(), lineno)?);
                } else if let Some(v) = rest.strip_prefix("displacement_limit:") {
                    let v = v.trim();
                    displacement_limit = Some(if v == "inf" {
                        f64::INFINITY
                    } else {
                        parse_f64(v, lineno)?
                    });
                } else if let Some(v) = rest.strip_prefix("complete_to:") {
                    complete_to = Some(parse_f64(v.trim(), lineno)?);
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let word_field = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing word", lineno + 1)))?;
            let word: Vec<u8> = if word_field == "-" {
                Vec::new()
            } else {
                word_field
                    .bytes()
                    .map(|ch| {
                        if ch.is_ascii_digit() {
                            Ok(ch - b'0')
                        } else {
                            Err(Error::Parse(format!(
                                "line {}: bad word character {:?}",
                                lineno + 1,
                                ch as char
                            )))
                        }
                    })
                    .collect::<Result<_>>()?
            };
            let mut vals = [0.0f64; 5];
            for v in vals.iter_mut() {
                let field = fields.next().ok_or_else(|| {
                    Error::Parse(format!("line {}: expected 5 numeric fields", lineno + 1))
                })?;
                *v = parse_f64(field, lineno)?;
            }
            if fields.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: trailing fields",
                    lineno + 1
                )));
            }
            elements.push(BallElement {
                element: GroupElement {
                    a: vals[0],
                    b: vals[1],
                    c: vals[2],
                    d: vals[3],
                },
                word,
                displacement: vals[4],
            });
        }
        Ok(FuchsianBall {
            elements,
            word_length_limit: word_length_limit
                .ok_or_else(|| Error::Parse("missing word_length_limit header".into()))?,
            displacement_limit: displacement_limit
                .ok_or_else(|| Error::Parse("missing displacement_limit header".into()))?,
            complete_to: complete_to
                .ok_or_else(|| Error::Parse("missing complete_to header".into()))?,
        })
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {}: bad float {s:?}", lineno + 1)))
}

fn parse_usize(s: &str, lineno: usize) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Parse(format!("line {}: bad integer {s:?}", lineno + 1)))
}

/// A point `Gamma g` of the quotient, carrying its representative and the
/// group handle.
#[derive(Debug, Clone)]
pub struct QuotientPoint {
    rep: GroupElement,
    group: Arc<FuchsianGroup>,
}

impl QuotientPoint {
    pub fn new(rep: GroupElement, group: Arc<FuchsianGroup>) -> QuotientPoint {
        QuotientPoint { rep, group }
    }

    pub fn rep(&self) -> &GroupElement {
        &self.rep
    }

    pub fn group(&self) -> &Arc<FuchsianGroup> {
        &self.group
    }

    pub fn same_group(&self, other: &QuotientPoint) -> bool {
        Arc::ptr_eq(&self.group, &other.group)
            || self
                .group
                .generators()
                .iter()
                .zip(other.group.generators())
                .all(|(a, b)| a == b)
    }

    /// Quotient equality test: bracket upper bound below `1e-9`.
    pub fn same_point(&self, other: &QuotientPoint, ball: &FuchsianBall) -> Result<bool> {
        Ok(quotient_dist(self, other, ball)?.bracket.hi < 1e-9)
    }
}

/// Result of a quotient-distance query: a bracket plus whether the lower end
/// is certified (ball demonstrably large enough that no group element outside
/// it can improve on the returned minimum).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuotientDistance {
    pub bracket: DistanceBracket,
    pub lo_certified: bool,
}

/// Bracket for `d_X(x, y) = min over gamma of d_G(g1, gamma g2)`.
///
/// `hi` is the minimum of upper bounds over the enumerated ball and is always
/// valid. The minimum of lower bounds over the ball bounds the true distance
/// only when every candidate minimizer lies inside the ball; a gamma with
/// `d_H(i, gamma i) > sqrt(2) hi + d_H(i, g1 i) + d_H(i, g2 i)` is too far to
/// beat `hi`, so the lower end is certified exactly when the ball is complete
/// to that radius. Otherwise the bracket degrades to `[0, hi]` and is flagged
/// hi-only.
pub fn quotient_dist(
    x: &QuotientPoint,
    y: &QuotientPoint,
    ball: &FuchsianBall,
) -> Result<QuotientDistance> {
    if !x.same_group(y) {
        return Err(Error::GroupMismatch);
    }
    let g1_inv = x.rep.inverse();
    let mut hi = f64::INFINITY;
    let mut lo_raw = f64::INFINITY;
    for el in ball.elements() {
        let (ub, lb) = if el.word.is_empty() {
            (dist_upper(&x.rep, &y.rep), dist_lower(&x.rep, &y.rep))
        } else {
            let w = g1_inv.compose(&el.element.compose(&y.rep));
            (
                w.log().norm(),
                dist_h2(&PointH2::I, &w.mobius(&PointH2::I)) / SQRT_2,
            )
        };
        if ub.is_finite() {
            hi = hi.min(ub);
        }
        if lb.is_finite() {
            lo_raw = lo_raw.min(lb);
        }
    }
    if !hi.is_finite() {
        return Err(Error::Domain(
            "quotient distance: no finite candidate in the ball".into(),
        ));
    }
    let threshold = SQRT_2 * hi + displacement(&x.rep) + displacement(&y.rep);
    let lo_certified = ball.complete_to() >= threshold;
    let lo = if lo_certified { lo_raw.min(hi) } else { 0.0 };
    Ok(QuotientDistance {
        bracket: DistanceBracket { lo, hi },
        lo_certified,
    })
}

/// A same-orbit certificate: `g1^-1 gamma g2 = b_tau` within tolerance.
#[derive(Debug, Clone)]
pub struct OrbitWitness {
    pub tau: f64,
    pub gamma: GroupElement,
    pub word: Vec<u8>,
}

/// Search the ball for `gamma` making `g1^-1 gamma g2` unipotent upper
/// triangular within `tol`. Finding one proves `y = theta_tau(x)`; finding
/// none is NOT a proof of distinct orbits (the search is a semi-decision
/// restricted to the ball) — pair with the trace obstruction for proofs.
pub fn same_orbit_witness(
    x: &QuotientPoint,
    y: &QuotientPoint,
    ball: &FuchsianBall,
    tol: f64,
) -> Result<Option<OrbitWitness>> {
    if !x.same_group(y) {
        return Err(Error::GroupMismatch);
    }
    let g1_inv = x.rep.inverse();
    for el in ball.elements() {
        let w = g1_inv.compose(&el.element.compose(&y.rep));
        if w.c.abs() < tol && (w.a - 1.0).abs() < tol && (w.d - 1.0).abs() < tol {
            return Ok(Some(OrbitWitness {
                tau: w.b,
                gamma: el.element,
                word: el.word.clone(),
            }));
        }
    }
    Ok(None)
}

/// Lower bounds for the group's trace gap and separation constant,
/// valid for the enumerated ball.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstantEstimates {
    /// `min over non-identity gamma in the ball of (tr(gamma) - 2)`.
    pub eps_star_lb: f64,
    /// `2 arccosh((2 + eps_star_lb)/2) / sqrt(2)`: minimal hyperbolic
    /// translation length through the sqrt(2)-Lipschitz orbit map.
    pub sigma0_lb: f64,
    pub word_length_used: usize,
}

/// Trace-gap lower bound from an enumerated ball. The bound is exact for the
/// enumerated elements; reports carry the ball radius used since elements
/// beyond it are not inspected.
pub fn estimate_eps_star(ball: &FuchsianBall) -> Result<ConstantEstimates> {
    let eps = ball
        .elements()
        .iter()
        .filter(|el| !el.word.is_empty())
        .map(|el| el.element.trace() - 2.0)
        .fold(f64::INFINITY, f64::min);
    if !eps.is_finite() {
        return Err(Error::Domain(
            "eps_star estimate needs at least one non-identity element".into(),
        ));
    }
    let estimates = ConstantEstimates {
        eps_star_lb: eps,
        sigma0_lb: 0.0,
        word_length_used: ball.word_length_limit(),
    };
    Ok(ConstantEstimates {
        sigma0_lb: estimate_sigma0(&estimates),
        ..estimates
    })
}

/// `sigma_0` lower bound: any hyperbolic `gamma` displaces every point of
/// the hyperbolic plane by at least its translation length
/// `2 arccosh(tr/2)`, and the orbit map contracts `d_G` by at most
/// `sqrt(2)`, so `d_G(gamma g, g) >= 2 arccosh((2 + eps)/2) / sqrt(2)`.
pub fn estimate_sigma0(estimates: &ConstantEstimates) -> f64 {
    2.0 * (1.0 + estimates.eps_star_lb / 2.0).acosh() / SQRT_2
}
