//! Reduction type of a uniformized variety and the resulting shape of the
//! Galois image on its `p`-power torsion.

use std::fmt;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reduction {
    Ordinary,
    Supersingular,
}

/// Abelian part of the Raynaud extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbelianPart {
    /// Total degeneration.
    None,
    Elliptic(Reduction),
    /// Isogenous to `copies` copies of one elliptic curve.
    ProductOfElliptic {
        copies: usize,
        reduction: Reduction,
    },
}

impl AbelianPart {
    pub fn dimension(&self) -> usize {
        match self {
            AbelianPart::None => 0,
            AbelianPart::Elliptic(_) => 1,
            AbelianPart::ProductOfElliptic { copies, .. } => *copies,
        }
    }

    pub fn reduction(&self) -> Option<Reduction> {
        match self {
            AbelianPart::None => None,
            AbelianPart::Elliptic(r) | AbelianPart::ProductOfElliptic { reduction: r, .. } => Some(*r),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UniformizationData {
    torus_rank: usize,
    abelian: AbelianPart,
    lattice_rank: usize,
    dimension: usize,
}

impl UniformizationData {
    /// Requires `lattice_rank = torus_rank >= 1` and
    /// `torus_rank + dim(abelian part) = dimension`.
    pub fn new(torus_rank: usize, abelian: AbelianPart, lattice_rank: usize, dimension: usize) -> Result<Self> {
        if torus_rank == 0 {
            return Err(Error::InvalidArgument("torus rank must be positive for a degenerating variety".into()));
        }
        if lattice_rank != torus_rank {
            return Err(Error::InvalidArgument(format!(
                "lattice rank {lattice_rank} differs from torus rank {torus_rank}"
            )));
        }
        if let AbelianPart::ProductOfElliptic { copies: 0, .. } = abelian {
            return Err(Error::InvalidArgument("product of zero elliptic curves".into()));
        }
        if torus_rank + abelian.dimension() != dimension {
            return Err(Error::InvalidArgument(format!(
                "torus rank {torus_rank} plus abelian dimension {} is not the dimension {dimension}",
                abelian.dimension()
            )));
        }
        Ok(UniformizationData { torus_rank, abelian, lattice_rank, dimension })
    }

    /// Lattice rank defaults to the torus rank.
    pub fn degenerating(torus_rank: usize, abelian: AbelianPart, dimension: usize) -> Result<Self> {
        Self::new(torus_rank, abelian, torus_rank, dimension)
    }

    pub fn torus_rank(&self) -> usize {
        self.torus_rank
    }

    pub fn abelian(&self) -> AbelianPart {
        self.abelian
    }

    pub fn lattice_rank(&self) -> usize {
        self.lattice_rank
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_totally_degenerate(&self) -> bool {
        self.abelian == AbelianPart::None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MonodromyKind {
    UnipotentInertia,
    FiniteIndexInertia,
    TrivialImage,
}

impl MonodromyKind {
    pub fn name(&self) -> &'static str {
        match self {
            MonodromyKind::UnipotentInertia => "UnipotentInertia",
            MonodromyKind::FiniteIndexInertia => "FiniteIndexInertia",
            MonodromyKind::TrivialImage => "TrivialImage",
        }
    }
}

impl fmt::Display for MonodromyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonodromyClassification {
    pub kind: MonodromyKind,
    pub citation: String,
}

fn setting(u: &UniformizationData) -> &'static str {
    match u.abelian {
        AbelianPart::Elliptic(_) => "abelian surface with semi-abelian reduction",
        AbelianPart::ProductOfElliptic { .. } => "Kuga-Satake variety of a type II degeneration",
        AbelianPart::None if u.dimension <= 2 => "totally degenerate abelian variety",
        AbelianPart::None => "Kuga-Satake variety of a type III degeneration",
    }
}

pub fn classify_monodromy(u: &UniformizationData) -> MonodromyClassification {
    let (kind, consequence) = match u.abelian.reduction() {
        Some(Reduction::Ordinary) => {
            (MonodromyKind::UnipotentInertia, "ordinary abelian part; inertia acts unipotently on p-power torsion")
        }
        Some(Reduction::Supersingular) => (
            MonodromyKind::FiniteIndexInertia,
            "supersingular abelian part; the inertia image has finite index in the Galois image",
        ),
        None => (
            MonodromyKind::TrivialImage,
            "split torus; p-power torsion is purely inseparable and the Galois image is trivial",
        ),
    };
    MonodromyClassification { kind, citation: format!("{}, torus rank {}: {consequence}", setting(u), u.torus_rank) }
}

/// The reference cases: abelian surfaces (`d = 2`) and Kuga-Satake varieties
/// of dimension `d` (type II with `d/2` elliptic copies, type III).
pub fn reference_cases(d: usize) -> Result<Vec<UniformizationData>> {
    if d < 4 || d % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Kuga-Satake dimension {d} must be even and at least 4")));
    }
    let h = d / 2;
    [
        (1, AbelianPart::Elliptic(Reduction::Ordinary), 2),
        (1, AbelianPart::Elliptic(Reduction::Supersingular), 2),
        (2, AbelianPart::None, 2),
        (h, AbelianPart::ProductOfElliptic { copies: h, reduction: Reduction::Ordinary }, d),
        (h, AbelianPart::ProductOfElliptic { copies: h, reduction: Reduction::Supersingular }, d),
        (d, AbelianPart::None, d),
    ]
    .into_iter()
    .map(|(r, a, dim)| UniformizationData::degenerating(r, a, dim))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(r: usize, a: AbelianPart, d: usize) -> MonodromyKind {
        classify_monodromy(&UniformizationData::degenerating(r, a, d).unwrap()).kind
    }

    #[test]
    fn surface_cases() {
        assert_eq!(kind(1, AbelianPart::Elliptic(Reduction::Ordinary), 2), MonodromyKind::UnipotentInertia);
        assert_eq!(kind(2, AbelianPart::None, 2), MonodromyKind::TrivialImage);
        assert_eq!(kind(1, AbelianPart::Elliptic(Reduction::Supersingular), 2), MonodromyKind::FiniteIndexInertia);
    }

    #[test]
    fn kuga_satake_cases() {
        let ss = AbelianPart::ProductOfElliptic { copies: 4, reduction: Reduction::Supersingular };
        assert_eq!(kind(4, ss, 8), MonodromyKind::FiniteIndexInertia);
        assert_eq!(kind(8, AbelianPart::None, 8), MonodromyKind::TrivialImage);
        let c = classify_monodromy(&UniformizationData::degenerating(8, AbelianPart::None, 8).unwrap());
        assert!(c.citation.contains("type III"));
    }

    #[test]
    fn validation() {
        let ord = AbelianPart::Elliptic(Reduction::Ordinary);
        assert!(UniformizationData::new(1, ord, 2, 2).is_err());
        assert!(UniformizationData::new(1, ord, 1, 3).is_err());
        assert!(UniformizationData::new(0, ord, 0, 1).is_err());
        assert!(UniformizationData::degenerating(1, AbelianPart::None, 2).is_err());
    }

    #[test]
    fn reference_table_is_total_and_deterministic() {
        let cases = reference_cases(8).unwrap();
        assert_eq!(cases.len(), 6);
        let kinds: Vec<_> = cases.iter().map(|u| classify_monodromy(u).kind).collect();
        use MonodromyKind::*;
        assert_eq!(
            kinds,
            [UnipotentInertia, FiniteIndexInertia, TrivialImage, UnipotentInertia, FiniteIndexInertia, TrivialImage]
        );
        assert_eq!(
            cases.iter().map(classify_monodromy).collect::<Vec<_>>(),
            cases.iter().map(classify_monodromy).collect::<Vec<_>>()
        );
    }
}
