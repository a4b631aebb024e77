//! The named direction families the experiments run on.
//!
//! Each family is built the same way: a self-similar collection of closed
//! intervals is iterated for `n` generations, and the directions are the left
//! endpoints of the final generation, nudged by a tiny offset so that every
//! direction sits strictly inside its cell at the working depth. The families
//! differ in the iteration map:
//!
//! * `quarter_cantor`: keeps the outer quarters of each interval, so splits
//!   stay well separated (relative gap 1/2 at every scale).
//! * `tournament`: keeps the two eighth-scale intervals touching at each
//!   midpoint. The gaps vanish, and the resulting parallelogram families
//!   force every sticky map to cover a common point.
//! * `vanishing`: contracts by `2^-j` at generation `j`, so the relative
//!   separation decays as the order grows.

use std::fmt;
use std::str::FromStr;

use crate::dirtree::DirTree;
use crate::dyadic::Dyadic;
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("family order must be at least 1")]
    OrderZero,
    #[error("family order {order} exceeds the supported maximum {max} for {family}")]
    OrderTooLarge { family: Family, order: u32, max: u32 },
    #[error("unknown family {0:?}: expected quarter-cantor, tournament, or vanishing")]
    UnknownFamily(String),
}

/// The three built-in families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    QuarterCantor,
    Tournament,
    Vanishing,
}

impl Family {
    pub fn max_order(self) -> u32 {
        match self {
            Family::QuarterCantor => 12,
            Family::Tournament => 12,
            Family::Vanishing => 9,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::QuarterCantor => "quarter-cantor",
            Family::Tournament => "tournament",
            Family::Vanishing => "vanishing",
        };
        f.write_str(name)
    }
}

impl FromStr for Family {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quarter-cantor" | "quarter_cantor" | "qc" => Ok(Family::QuarterCantor),
            "tournament" => Ok(Family::Tournament),
            "vanishing" => Ok(Family::Vanishing),
            other => Err(FamilyError::UnknownFamily(other.to_string())),
        }
    }
}

/// A generated family: its directions, working depth, and direction tree.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub family: Family,
    pub order: u32,
    pub directions: Vec<Dyadic>,
    pub depth: u32,
    pub tree: DirTree,
}

/// Builds a family instance at the given order.
pub fn generate(family: Family, order: u32) -> Result<FamilyInstance, FamilyError> {
    if order == 0 {
        return Err(FamilyError::OrderZero);
    }
    if order > family.max_order() {
        return Err(FamilyError::OrderTooLarge {
            family,
            order,
            max: family.max_order(),
        });
    }
    let (intervals, offset_exp, depth) = match family {
        Family::QuarterCantor => (
            quarter_cantor_generation(order),
            8 * order as i64,
            2 * order,
        ),
        Family::Tournament => (
            tournament_generation(order),
            100 * order as i64,
            3 * order,
        ),
        Family::Vanishing => (
            vanishing_generation(order),
            (order * order + 3 * order) as i64,
            order * (order + 1) / 2 + order + 2,
        ),
    };
    let offset = Dyadic::pow2(-offset_exp);
    let directions: Vec<Dyadic> = intervals.iter().map(|i| &i.lo() + &offset).collect();
    let tree = DirTree::from_directions(&directions, depth).expect("directions lie in [0, 1]");
    Ok(FamilyInstance {
        family,
        order,
        directions,
        depth,
        tree,
    })
}

/// Generation `n` of the quarter-scale Cantor iteration: each interval keeps
/// its outer quarters.
pub fn quarter_cantor_generation(n: u32) -> Vec<Interval> {
    let mut gen = vec![Interval::unit()];
    for _ in 0..n {
        gen = gen
            .iter()
            .flat_map(|i| {
                let quarter = i.length().mul_pow2(-2);
                [
                    Interval::new(i.lo(), &i.lo() + &quarter).expect("ordered"),
                    Interval::new(&i.hi() - &quarter, i.hi()).expect("ordered"),
                ]
            })
            .collect();
    }
    gen
}

/// Generation `n` of the touching-eighths iteration: each interval maps to
/// its two eighth-scale contractions meeting at the midpoint.
pub fn tournament_generation(n: u32) -> Vec<Interval> {
    let mut gen = vec![Interval::unit()];
    for _ in 0..n {
        gen = gen
            .iter()
            .flat_map(|i| {
                [
                    i.contract_eighth_low().expect("non-degenerate"),
                    i.contract_eighth_high().expect("non-degenerate"),
                ]
            })
            .collect();
    }
    gen
}

/// Generation `k` of the vanishing-separation iteration: generation `j`
/// contracts each interval by `2^-j` on both sides of its midpoint.
pub fn vanishing_generation(k: u32) -> Vec<Interval> {
    let mut gen = vec![Interval::unit()];
    for j in 1..=k {
        gen = gen
            .iter()
            .flat_map(|i| {
                [
                    i.contract_low(j).expect("non-degenerate"),
                    i.contract_high(j).expect("non-degenerate"),
                ]
            })
            .collect();
    }
    gen
}

/// The common point `(1, y_n)` that every sticky parallelogram family of the
/// tournament tree covers: `y_n = 1 + sum_{k=1..n} 8^-k - 8^-(n+1)`.
pub fn forced_hit_point(n: u32) -> (Dyadic, Dyadic) {
    let mut y = Dyadic::one();
    for k in 1..=n as i64 {
        y = &y + &Dyadic::pow2(-3 * k);
    }
    y = &y - &Dyadic::pow2(-3 * (n as i64 + 1));
    (Dyadic::one(), y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirtree::Separation;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn iv(lo: &str, hi: &str) -> Interval {
        Interval::new(d(lo), d(hi)).unwrap()
    }

    #[test]
    fn family_names_round_trip() {
        for f in [Family::QuarterCantor, Family::Tournament, Family::Vanishing] {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert_eq!("qc".parse::<Family>().unwrap(), Family::QuarterCantor);
        assert!("mystery".parse::<Family>().is_err());
    }

    #[test]
    fn quarter_cantor_generations() {
        assert_eq!(
            quarter_cantor_generation(1),
            vec![iv("0", "1/2^2"), iv("3/2^2", "1")]
        );
        assert_eq!(
            quarter_cantor_generation(2),
            vec![
                iv("0", "1/2^4"),
                iv("3/2^4", "1/2^2"),
                iv("3/2^2", "13/2^4"),
                iv("15/2^4", "1"),
            ]
        );
    }

    #[test]
    fn tournament_generations() {
        assert_eq!(
            tournament_generation(1),
            vec![iv("3/2^3", "1/2^1"), iv("1/2^1", "5/2^3")]
        );
        assert_eq!(
            tournament_generation(2),
            vec![
                iv("27/2^6", "7/2^4"),
                iv("7/2^4", "29/2^6"),
                iv("35/2^6", "9/2^4"),
                iv("9/2^4", "37/2^6"),
            ]
        );
    }

    #[test]
    fn vanishing_generations() {
        assert_eq!(
            vanishing_generation(1),
            vec![iv("0", "1/2^1"), iv("1/2^1", "1")]
        );
        assert_eq!(
            vanishing_generation(2),
            vec![
                iv("1/2^3", "1/2^2"),
                iv("1/2^2", "3/2^3"),
                iv("5/2^3", "3/2^2"),
                iv("3/2^2", "7/2^3"),
            ]
        );
    }

    #[test]
    fn quarter_cantor_instance() {
        let fam = generate(Family::QuarterCantor, 1).unwrap();
        assert_eq!(fam.depth, 2);
        assert_eq!(fam.directions, vec![d("1/2^8"), d("193/2^8")]);
        assert_eq!(fam.tree.lacunary_order(), 1);
    }

    #[test]
    fn tournament_instance() {
        let fam = generate(Family::Tournament, 1).unwrap();
        assert_eq!(fam.depth, 3);
        let off = Dyadic::pow2(-100);
        assert_eq!(
            fam.directions,
            vec![&d("3/2^3") + &off, &d("1/2^1") + &off]
        );
        assert_eq!(fam.tree.lacunary_order(), 1);
        assert_eq!(fam.tree.vertices_at(3).len(), 2);
    }

    #[test]
    fn vanishing_instance() {
        let fam = generate(Family::Vanishing, 4).unwrap();
        assert_eq!(fam.depth, 16);
        assert_eq!(fam.directions.len(), 16);
        assert_eq!(fam.tree.lacunary_order(), 4);
    }

    #[test]
    fn orders_validated() {
        assert!(matches!(
            generate(Family::Tournament, 0),
            Err(FamilyError::OrderZero)
        ));
        assert!(matches!(
            generate(Family::Vanishing, 10),
            Err(FamilyError::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn lacunary_order_matches_family_order() {
        for n in 1..=4 {
            let qc = generate(Family::QuarterCantor, n).unwrap();
            assert_eq!(qc.tree.lacunary_order(), n, "quarter-cantor {n}");
            let tn = generate(Family::Tournament, n).unwrap();
            assert_eq!(tn.tree.lacunary_order(), n, "tournament {n}");
        }
        for n in 2..=4 {
            let vn = generate(Family::Vanishing, n).unwrap();
            assert_eq!(vn.tree.lacunary_order(), n, "vanishing {n}");
        }
        // At order 1 the vanishing offset is 2^-4 while the working depth is
        // also 4, so every direction lands exactly on the bottom grid and
        // closed membership doubles the final cells: one extra split.
        let v1 = generate(Family::Vanishing, 1).unwrap();
        assert_eq!(v1.tree.lacunary_order(), 2);
    }

    #[test]
    fn family_trees_are_already_pruned() {
        for n in 1..=3 {
            let qc = generate(Family::QuarterCantor, n).unwrap();
            assert_eq!(qc.tree.prune(n).unwrap(), qc.tree, "quarter-cantor {n}");
            let tn = generate(Family::Tournament, n).unwrap();
            assert_eq!(tn.tree.prune(n).unwrap(), tn.tree, "tournament {n}");
        }
    }

    #[test]
    fn separations_at_the_extremes() {
        // Quarter-Cantor: nested splits always sit in the outer quarters.
        for n in 2..=4 {
            let fam = generate(Family::QuarterCantor, n).unwrap();
            assert_eq!(
                fam.tree.separation_eta_max(),
                Separation::Value(d("1/2^1")),
                "quarter-cantor {n}"
            );
        }
        // Tournament: nested splits touch at interval midpoints.
        for n in 2..=3 {
            let fam = generate(Family::Tournament, n).unwrap();
            assert_eq!(
                fam.tree.separation_eta_max(),
                Separation::Value(Dyadic::zero()),
                "tournament {n}"
            );
        }
        // Order 1 has no nested splits at all.
        let fam = generate(Family::QuarterCantor, 1).unwrap();
        assert_eq!(fam.tree.separation_eta_max(), Separation::Unconstrained);
    }

    #[test]
    fn forced_hit_points() {
        assert_eq!(forced_hit_point(1), (Dyadic::one(), d("71/2^6")));
        assert_eq!(forced_hit_point(2), (Dyadic::one(), d("583/2^9")));
    }
}
