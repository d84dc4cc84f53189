use num_traits::Zero;

use super::algebra::{CliffordElement, Parity};
use super::lattice::GramLattice;
use super::subspace::Subspace;
use crate::exec::Strategy;
use crate::rational::{int, Rational};
use crate::{Error, Result};

/// Coordinate bound for [`find_isotropic_vector`] and [`find_isotropic_pair`].
pub const MAX_SEARCH_HEIGHT: i64 = 10;

/// `d = 2^(n+1)`, half of `dim Cl(V)`.
pub fn kuga_satake_dimension(n: usize) -> usize {
    1 << (n + 1)
}

fn coords(l: &GramLattice, v: &[Rational]) -> Result<()> {
    if v.len() != l.rank() {
        return Err(Error::Lattice(format!("vector of length {} in a rank {} lattice", v.len(), l.rank())));
    }
    Ok(())
}

/// `a · Cl(V)`, the column space of left multiplication by `a`.
pub fn left_ideal_image(l: &GramLattice, a: &CliffordElement, strategy: Strategy) -> Result<Subspace> {
    if a.is_zero() {
        return Err(Error::InvalidArgument("image of the zero element".into()));
    }
    let cols: Vec<Vec<Rational>> = l.left_mul_columns(a)?.into_iter().map(CliffordElement::into_coeffs).collect();
    Subspace::span(l.algebra_dim(), &cols, strategy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiltrationType {
    II,
    III,
}

/// `0 ⊆ W_-2 ⊆ W_-1 ⊆ W_0 = Cl(V)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFiltration {
    kind: FiltrationType,
    lattice: GramLattice,
    isotropic: Vec<Vec<Rational>>,
    levels: [Subspace; 3],
}

impl WeightFiltration {
    pub fn kind(&self) -> FiltrationType {
        self.kind
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn isotropic(&self) -> &[Vec<Rational>] {
        &self.isotropic
    }

    /// `W_i` for `i` in `-2..=0`.
    pub fn level(&self, i: i32) -> Option<&Subspace> {
        (-2..=0).contains(&i).then(|| &self.levels[(i + 2) as usize])
    }

    /// `(dim W_-2, dim W_-1, dim W_0)`.
    pub fn dims(&self) -> [usize; 3] {
        [self.levels[0].rank(), self.levels[1].rank(), self.levels[2].rank()]
    }

    /// `(dim gr_-2, dim gr_-1, dim gr_0)`.
    pub fn graded_dims(&self) -> [usize; 3] {
        let [a, b, c] = self.dims();
        [a, b - a, c - b]
    }

    pub fn containments_hold(&self) -> Result<bool> {
        Ok(self.levels[1].contains(&self.levels[0])? && self.levels[2].contains(&self.levels[1])?)
    }
}

fn isotropy_failure(what: &str) -> Error {
    Error::NotIsotropic(what.into())
}

fn invariant(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invariant(what()))
    }
}

/// `W_-2 = im(e1 e2)`, `W_-1 = im(e1) + im(e2)`.
pub fn filtration_type2(
    l: &GramLattice,
    e1: &[Rational],
    e2: &[Rational],
    strategy: Strategy,
) -> Result<WeightFiltration> {
    coords(l, e1)?;
    coords(l, e2)?;
    if !l.q(e1).is_zero() || !l.q(e2).is_zero() {
        return Err(isotropy_failure("q(e1) and q(e2) must vanish"));
    }
    if !l.bilinear(e1, e2).is_zero() {
        return Err(isotropy_failure("B(e1, e2) must vanish"));
    }
    if Subspace::span(l.rank(), &[e1.to_vec(), e2.to_vec()], Strategy::Sequential)?.rank() != 2 {
        return Err(isotropy_failure("e1 and e2 must be linearly independent"));
    }
    let a1 = CliffordElement::vector(e1);
    let a2 = CliffordElement::vector(e2);
    let w2 = left_ideal_image(l, &l.mul(&a1, &a2)?, strategy)?;
    let w1 = left_ideal_image(l, &a1, strategy)?.sum(&left_ideal_image(l, &a2, strategy)?, strategy)?;
    let f = WeightFiltration {
        kind: FiltrationType::II,
        lattice: l.clone(),
        isotropic: vec![e1.to_vec(), e2.to_vec()],
        levels: [w2, w1, Subspace::full(l.algebra_dim())],
    };
    let n = l.n();
    let [g2, g1, _] = f.graded_dims();
    invariant(g2 == 1 << n, || format!("dim W_-2 = {g2}, expected {}", 1 << n))?;
    invariant(g1 == 1 << (n + 1), || format!("dim gr_-1 = {g1}, expected {}", 1 << (n + 1)))?;
    invariant(f.containments_hold()?, || "W_-2 is not contained in W_-1".into())?;
    Ok(f)
}

/// `W_-2 = W_-1 = im(e1)`.
pub fn filtration_type3(l: &GramLattice, e1: &[Rational], strategy: Strategy) -> Result<WeightFiltration> {
    coords(l, e1)?;
    if e1.iter().all(Zero::is_zero) {
        return Err(isotropy_failure("e1 must be nonzero"));
    }
    if !l.q(e1).is_zero() {
        return Err(isotropy_failure("q(e1) must vanish"));
    }
    let w = left_ideal_image(l, &CliffordElement::vector(e1), strategy)?;
    let f = WeightFiltration {
        kind: FiltrationType::III,
        lattice: l.clone(),
        isotropic: vec![e1.to_vec()],
        levels: [w.clone(), w, Subspace::full(l.algebra_dim())],
    };
    let d = kuga_satake_dimension(l.n());
    let [g2, g1, _] = f.graded_dims();
    invariant(g2 == d, || format!("dim W_-1 = {g2}, expected {d}"))?;
    invariant(g1 == 0, || format!("gr_-1 has dimension {g1}"))?;
    Ok(f)
}

/// `H_-2 ⊕ H_-1 ⊕ H_0 = Cl(V)` with `H_-i = im(∧^(2-i) I_1) ∩ W_-i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSplitting {
    filtration: WeightFiltration,
    dual: [Vec<Rational>; 2],
    pieces: [Subspace; 3],
    i0_basis: Vec<Vec<Rational>>,
}

impl GradedSplitting {
    pub fn filtration(&self) -> &WeightFiltration {
        &self.filtration
    }

    pub fn dual(&self) -> &[Vec<Rational>; 2] {
        &self.dual
    }

    /// `H_i` for `i` in `-2..=0`.
    pub fn piece(&self, i: i32) -> Option<&Subspace> {
        (-2..=0).contains(&i).then(|| &self.pieces[(i + 2) as usize])
    }

    /// `(dim H_-2, dim H_-1, dim H_0)`.
    pub fn dims(&self) -> [usize; 3] {
        [self.pieces[0].rank(), self.pieces[1].rank(), self.pieces[2].rank()]
    }

    /// Basis of `I_0 = (I_-1 + I_1)^⊥`.
    pub fn i0_basis(&self) -> &[Vec<Rational>] {
        &self.i0_basis
    }

    pub fn is_direct_sum(&self, strategy: Strategy) -> Result<bool> {
        let total = self.filtration.lattice.algebra_dim();
        let sum = self.pieces[0].sum(&self.pieces[1], strategy)?.sum(&self.pieces[2], strategy)?;
        Ok(sum.rank() == total && self.dims().iter().sum::<usize>() == total)
    }
}

pub fn graded_splitting(
    f: &WeightFiltration,
    e3: &[Rational],
    e4: &[Rational],
    strategy: Strategy,
) -> Result<GradedSplitting> {
    if f.kind != FiltrationType::II {
        return Err(Error::InvalidArgument("graded splitting needs a type II filtration".into()));
    }
    let l = &f.lattice;
    coords(l, e3)?;
    coords(l, e4)?;
    let (e1, e2) = (&f.isotropic[0], &f.isotropic[1]);
    let conditions = [
        (l.bilinear(e1, e3), 1, "B(e1, e3) = 1"),
        (l.bilinear(e2, e4), 1, "B(e2, e4) = 1"),
        (l.bilinear(e1, e4), 0, "B(e1, e4) = 0"),
        (l.bilinear(e2, e3), 0, "B(e2, e3) = 0"),
        (l.q(e3), 0, "q(e3) = 0"),
        (l.q(e4), 0, "q(e4) = 0"),
        (l.bilinear(e3, e4), 0, "B(e3, e4) = 0"),
    ];
    if let Some((_, _, what)) = conditions.iter().find(|(v, want, _)| *v != int(*want)) {
        return Err(Error::Duality(format!("{what} fails")));
    }
    let a3 = CliffordElement::vector(e3);
    let a4 = CliffordElement::vector(e4);
    let im3 = left_ideal_image(l, &a3, strategy)?;
    let im4 = left_ideal_image(l, &a4, strategy)?;
    let im34 = left_ideal_image(l, &l.mul(&a3, &a4)?, strategy)?;
    let [w2, w1, w0] = &f.levels;
    let pieces = [w2.clone(), im3.sum(&im4, strategy)?.intersection(w1, strategy)?, im34.intersection(w0, strategy)?];
    let rows: Vec<Vec<Rational>> =
        [e1, e2, e3, e4].iter().map(|e| (0..l.rank()).map(|j| l.bilinear(e, &l.basis_vector(j))).collect()).collect();
    let i0_basis = Subspace::kernel(l.rank(), &rows)?;
    let s = GradedSplitting { filtration: f.clone(), dual: [e3.to_vec(), e4.to_vec()], pieces, i0_basis };
    let n = l.n();
    let want = [1 << n, 1 << (n + 1), 1 << n];
    invariant(s.dims() == want, || format!("graded dims {:?}, expected {want:?}", s.dims()))?;
    invariant(w2.contains(&s.pieces[0])?, || "H_-2 is not inside W_-2".into())?;
    invariant(s.is_direct_sum(strategy)?, || "graded pieces do not fill Cl(V)".into())?;
    Ok(s)
}

/// Summand of `V = I_-1 ⊕ I_0 ⊕ I_1` and the degree it shifts `H_•` by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IPiece {
    Minus1,
    Zero,
    Plus1,
}

impl IPiece {
    pub fn shift(self) -> i32 {
        match self {
            IPiece::Minus1 => -1,
            IPiece::Zero => 0,
            IPiece::Plus1 => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IPiece::Minus1 => "I_-1",
            IPiece::Zero => "I_0",
            IPiece::Plus1 => "I_1",
        }
    }
}

/// `v · H_source ⊆ H_target` for `v` in `piece`; `H_j = 0` outside `-2..=0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Containment {
    pub piece: IPiece,
    pub source: i32,
    pub target: i32,
    pub holds: bool,
    /// No representatives: the summand is zero.
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocharacterCheck {
    pub containments: Vec<Containment>,
    /// Left multiplication by `v·u`, `u` a basis vector, preserves parity.
    pub parity_preserved: bool,
}

impl CocharacterCheck {
    pub fn all_hold(&self) -> bool {
        self.parity_preserved && self.containments.iter().all(|c| c.holds)
    }
}

fn piece_of(s: &GradedSplitting, v: &[Rational]) -> Result<IPiece> {
    let l = &s.filtration.lattice;
    coords(l, v)?;
    if v.iter().all(Zero::is_zero) {
        return Err(Error::NotHomogeneous);
    }
    let span =
        |a: &Vec<Rational>, b: &Vec<Rational>| Subspace::span(l.rank(), &[a.clone(), b.clone()], Strategy::Sequential);
    let iso = &s.filtration.isotropic;
    if span(&iso[0], &iso[1])?.contains_vector(v) {
        return Ok(IPiece::Minus1);
    }
    if span(&s.dual[0], &s.dual[1])?.contains_vector(v) {
        return Ok(IPiece::Plus1);
    }
    if iso.iter().chain(&s.dual).all(|e| l.bilinear(e, v).is_zero()) {
        return Ok(IPiece::Zero);
    }
    Err(Error::NotHomogeneous)
}

fn maps_into(s: &GradedSplitting, v: &[Rational], source: i32, target: i32, strategy: Strategy) -> Result<bool> {
    let l = &s.filtration.lattice;
    let x = CliffordElement::vector(v);
    let zero = Subspace::zero(l.algebra_dim());
    let dest = s.piece(target).unwrap_or(&zero);
    let src = s.piece(source).expect("source degree in range");
    let images: Vec<Vec<Rational>> = strategy.map(src.basis(), |h| {
        let h = CliffordElement::from_coeffs(l.rank(), h).expect("basis vector length");
        l.mul(&x, &h).expect("same lattice").into_coeffs()
    });
    Ok(images.iter().all(|w| dest.contains_vector(w)))
}

fn parity_preserved(l: &GramLattice, v: &[Rational]) -> Result<bool> {
    let x = CliffordElement::vector(v);
    for j in 0..l.rank() {
        let g = l.mul(&x, &CliffordElement::vector(&l.basis_vector(j)))?;
        if g.is_zero() {
            continue;
        }
        for (mask, col) in l.left_mul_columns(&g)?.iter().enumerate() {
            if !col.is_zero() && col.parity() != Some(Parity::of_mask(mask)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks `v · H_j ⊆ H_(j + shift)` for each `j` and the parity condition.
pub fn cocharacter_check(s: &GradedSplitting, v: &[Rational], strategy: Strategy) -> Result<CocharacterCheck> {
    let piece = piece_of(s, v)?;
    let mut containments = Vec::with_capacity(3);
    for source in -2..=0 {
        let target = source + piece.shift();
        let holds = maps_into(s, v, source, target, strategy)?;
        containments.push(Containment { piece, source, target, holds, vacuous: false });
    }
    Ok(CocharacterCheck { containments, parity_preserved: parity_preserved(&s.filtration.lattice, v)? })
}

/// The nine containments over basis representatives of `I_-1`, `I_0`, `I_1`.
pub fn cocharacter_table(s: &GradedSplitting, strategy: Strategy) -> Result<CocharacterCheck> {
    let iso = &s.filtration.isotropic;
    let reps: [(IPiece, Vec<Vec<Rational>>); 3] =
        [(IPiece::Minus1, iso.clone()), (IPiece::Zero, s.i0_basis.clone()), (IPiece::Plus1, s.dual.to_vec())];
    let mut containments = Vec::with_capacity(9);
    let mut parity = true;
    for (piece, vs) in &reps {
        let checks = vs.iter().map(|v| cocharacter_check(s, v, strategy)).collect::<Result<Vec<_>>>()?;
        parity &= checks.iter().all(|c| c.parity_preserved);
        for (k, source) in (-2..=0).enumerate() {
            containments.push(Containment {
                piece: *piece,
                source,
                target: source + piece.shift(),
                holds: checks.iter().all(|c| c.containments[k].holds),
                vacuous: vs.is_empty(),
            });
        }
    }
    Ok(CocharacterCheck { containments, parity_preserved: parity })
}

/// Integer vectors with `max |x_i| = h`, first nonzero coordinate positive.
fn shell(m: usize, h: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * h + 1) as u64;
    (0..side.pow(m as u32)).filter_map(move |mut code| {
        let mut v = vec![0i64; m];
        for x in v.iter_mut() {
            *x = (code % side) as i64 - h;
            code /= side;
        }
        let lead_positive = v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0);
        (lead_positive && v.iter().any(|x| x.abs() == h)).then_some(v)
    })
}

fn check_height(height: i64) -> Result<()> {
    if !(1..=MAX_SEARCH_HEIGHT).contains(&height) {
        return Err(Error::InvalidArgument(format!("search height {height} outside 1..={MAX_SEARCH_HEIGHT}")));
    }
    Ok(())
}

fn to_rationals(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// A nonzero isotropic integer vector of smallest height, if any has height
/// at most `height`.
pub fn find_isotropic_vector(l: &GramLattice, height: i64) -> Result<Option<Vec<Rational>>> {
    check_height(height)?;
    for h in 1..=height {
        if let Some(v) = shell(l.rank(), h).map(|v| to_rationals(&v)).find(|v| l.q(v).is_zero()) {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Independent isotropic `e1, e2` with `B(e1, e2) = 0`, coordinates bounded
/// by `height`.
pub fn find_isotropic_pair(l: &GramLattice, height: i64) -> Result<Option<(Vec<Rational>, Vec<Rational>)>> {
    check_height(height)?;
    let mut found: Vec<Vec<Rational>> = Vec::new();
    for h in 1..=height {
        let start = found.len();
        found.extend(shell(l.rank(), h).map(|v| to_rationals(&v)).filter(|v| l.q(v).is_zero()));
        for j in start..found.len() {
            for i in 0..j {
                let (a, b) = (&found[i], &found[j]);
                if l.bilinear(a, b).is_zero()
                    && Subspace::span(l.rank(), &[a.clone(), b.clone()], Strategy::Sequential)?.rank() == 2
                {
                    return Ok(Some((a.clone(), b.clone())));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split2(n: usize) -> (GramLattice, WeightFiltration) {
        let l = GramLattice::split_type2(n).unwrap();
        let f = filtration_type2(&l, &l.basis_vector(0), &l.basis_vector(1), Strategy::default()).unwrap();
        (l, f)
    }

    #[test]
    fn ideal_images() {
        let l = GramLattice::split_type3(1).unwrap();
        let s = Strategy::Sequential;
        assert_eq!(left_ideal_image(&l, &CliffordElement::one(3), s).unwrap().rank(), 8);
        assert_eq!(left_ideal_image(&l, &CliffordElement::vector(&l.basis_vector(0)), s).unwrap().rank(), 4);
        assert!(left_ideal_image(&l, &CliffordElement::zero(3), s).is_err());
    }

    #[test]
    fn type2_dims() {
        let (_, f) = split2(2);
        assert_eq!(f.dims(), [4, 12, 16]);
        assert_eq!(f.dims()[0], kuga_satake_dimension(2) / 2);
        assert_eq!(split2(3).1.dims(), [8, 24, 32]);
    }

    #[test]
    fn type3_dims() {
        for (n, d) in [(1, 4), (3, 16)] {
            let l = GramLattice::split_type3(n).unwrap();
            let f = filtration_type3(&l, &l.basis_vector(0), Strategy::default()).unwrap();
            assert_eq!(f.dims(), [d, d, 2 * d]);
            assert_eq!(f.graded_dims()[1], 0);
        }
    }

    #[test]
    fn rejects_non_isotropic() {
        let l = GramLattice::split_type2(2).unwrap();
        let s = Strategy::Sequential;
        let e1 = l.basis_vector(0);
        assert!(matches!(filtration_type2(&l, &e1, &l.basis_vector(2), s), Err(Error::NotIsotropic(_))));
        assert!(matches!(filtration_type2(&l, &e1, &e1, s), Err(Error::NotIsotropic(_))));
        let v: Vec<Rational> = vec![int(1), int(0), int(1), int(0)];
        assert!(filtration_type3(&l, &v, s).is_err());
    }

    #[test]
    fn splitting_and_cocharacters() {
        let (l, f) = split2(2);
        let s = Strategy::default();
        let g = graded_splitting(&f, &l.basis_vector(2), &l.basis_vector(3), s).unwrap();
        assert_eq!(g.dims(), [4, 8, 4]);
        assert!(g.is_direct_sum(s).unwrap());
        let e1 = cocharacter_check(&g, &l.basis_vector(0), s).unwrap();
        assert!(e1.all_hold());
        assert_eq!((e1.containments[2].source, e1.containments[2].target), (0, -1));
        let e3 = cocharacter_check(&g, &l.basis_vector(2), s).unwrap();
        assert_eq!((e3.containments[0].source, e3.containments[0].target), (-2, -1));
        assert!(e3.all_hold());
        let table = cocharacter_table(&g, s).unwrap();
        assert_eq!(table.containments.len(), 9);
        assert!(table.all_hold());
        let mixed = vec![int(1), int(0), int(1), int(0)];
        assert_eq!(cocharacter_check(&g, &mixed, s), Err(Error::NotHomogeneous));
        assert!(matches!(graded_splitting(&f, &l.basis_vector(3), &l.basis_vector(2), s), Err(Error::Duality(_))));
    }

    #[test]
    fn middle_piece_preserves_degree() {
        let (l, f) = split2(3);
        let s = Strategy::default();
        let g = graded_splitting(&f, &l.basis_vector(2), &l.basis_vector(3), s).unwrap();
        assert_eq!(g.i0_basis().len(), 1);
        let c = cocharacter_check(&g, &l.basis_vector(4), s).unwrap();
        assert!(c.all_hold());
        assert!(c.containments.iter().all(|x| x.source == x.target));
    }

    #[test]
    fn isotropic_search() {
        let l = GramLattice::split_type2(3).unwrap();
        let (a, b) = find_isotropic_pair(&l, 1).unwrap().unwrap();
        assert!(filtration_type2(&l, &a, &b, Strategy::default()).is_ok());
        let v = find_isotropic_vector(&l, 1).unwrap().unwrap();
        assert!(l.q(&v).is_zero());
        assert!(find_isotropic_vector(&l, 11).is_err());
    }
}
