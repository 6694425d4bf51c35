use super::{FormKind, NormalForm, NormalFormError};
use crate::series::{BigFloat, Coefficient, Rational, Ring, TruncatedSeries1, EXACT};

/// Guard bits carried through the fractional-power arithmetic.
const GUARD_BITS: usize = 32;

/// Reparametrization of `H` taking the `c~` form to the fibration form.
#[derive(Clone, Debug, PartialEq)]
pub struct FibrationChange {
    /// `h(H)`, with `h(0) = 0` and `h'(0) > 0`.
    pub h: TruncatedSeries1<BigFloat>,
    /// `f^` with `h f^(h) = H`.
    pub fhat: TruncatedSeries1<BigFloat>,
    /// The normalized leading function; equal to `1` up to rounding.
    pub leading: TruncatedSeries1<BigFloat>,
    pub precision: usize,
}

impl FibrationChange {
    /// Largest coefficient of `h(t) f^(h(t)) - t`.
    pub fn invariant_error(&self) -> f64 {
        let ring = self.h.ring();
        let composed = self
            .fhat
            .compose(&self.h)
            .and_then(|fh| self.h.checked_mul(&fh));
        match composed {
            Ok(p) => p
                .checked_sub(&TruncatedSeries1::variable(ring, p.order()))
                .map_or(f64::INFINITY, |d| d.max_abs_f64()),
            Err(_) => f64::INFINITY,
        }
    }

    /// Largest coefficient of `leading - 1`.
    pub fn leading_error(&self) -> f64 {
        let ring = self.leading.ring();
        let one = TruncatedSeries1::constant(BigFloat::one(ring), ring, self.leading.order());
        self.leading
            .checked_sub(&one)
            .map_or(f64::INFINITY, |d| d.max_abs_f64())
    }
}

fn to_ring<C: Coefficient>(
    s: &TruncatedSeries1<C>,
    precision: usize,
) -> TruncatedSeries1<BigFloat> {
    s.map_ring(Ring::big_float(precision), |c| c.to_big_float(precision))
}

/// `s^p` for a series with positive constant term.
fn positive_power(
    s: &TruncatedSeries1<BigFloat>,
    p: &Rational,
) -> Result<TruncatedSeries1<BigFloat>, NormalFormError> {
    let c0 = s.coeff(0);
    let inv = c0
        .inv()
        .ok_or_else(|| NormalFormError::Degenerate("zero constant term".into()))?;
    let unit = s.scale(&inv).with_unit_constant();
    Ok(unit.unit_power(p)?.scale(&c0.pow_rational(p)))
}

trait UnitConstant {
    fn with_unit_constant(self) -> Self;
}

impl UnitConstant for TruncatedSeries1<BigFloat> {
    // Scaling by the reciprocal leaves the constant term within an ulp of 1;
    // pin it so the binomial expansion applies.
    fn with_unit_constant(self) -> Self {
        let ring = self.ring();
        let rest: Vec<_> = self
            .terms()
            .filter(|(e, _)| *e > 0)
            .map(|(e, c)| (e, c.clone()))
            .collect();
        TruncatedSeries1::from_terms(
            ring,
            self.order(),
            std::iter::once((0, BigFloat::one(ring))).chain(rest),
        )
    }
}

/// `(i + 1)/k - 1/2`.
fn weight(i: u32, k: u32) -> Rational {
    Rational::from_parts((i as i64 + 1).into(), (k as u64).into())
        - Rational::from_parts(1.into(), 2u8.into())
}

/// Fibration form of a CH_FORM, in the big-float ring of `precision` bits.
pub fn fibration_form<C: Coefficient>(
    nf: &NormalForm<C>,
    precision: usize,
) -> Result<(NormalForm<BigFloat>, FibrationChange), NormalFormError> {
    if nf.kind != FormKind::ChForm {
        return Err(NormalFormError::Mismatch(format!(
            "expected CH_FORM, got {:?}",
            nf.kind
        )));
    }
    let k = nf.k();
    let work = precision + GUARD_BITS;
    let ring = Ring::big_float(work);
    let mut comps: Vec<_> = nf.components.iter().map(|c| to_ring(c, work)).collect();
    let lead = comps
        .first()
        .map(|c| c.coeff(0))
        .ok_or_else(|| NormalFormError::Structure("no components".into()))?;
    if lead.is_zero() {
        return Err(NormalFormError::Degenerate(
            "c~_0(0) = 0: the form is not symplectic".into(),
        ));
    }
    let orientation_flipped = lead.is_negative();
    if orientation_flipped {
        comps = comps.iter().map(|c| c.neg()).collect();
    }
    let c0 = &comps[0];
    let m = if c0.is_exact() {
        if nf.source_order == EXACT {
            return Err(NormalFormError::Structure(
                "fibration form needs a finite order".into(),
            ));
        }
        nf.source_order / k
    } else {
        c0.order()
    };

    // Normalizing the leading action: h^alpha F(h) = H^alpha.
    let alpha = Rational::from_parts((k as i64 + 2).into(), (2 * k as u64).into());
    let big_f = TruncatedSeries1::from_terms(
        ring,
        m,
        c0.with_order(m).terms().map(|(n, c)| {
            let w = &alpha / (Rational::from(n) + &alpha);
            (n, c.mul(&BigFloat::from_rational(&w, ring)))
        }),
    );
    let inv_alpha = Rational::ONE / &alpha;
    let fhat = positive_power(&big_f, &inv_alpha)?;
    let h = fhat.shift_up(1).invert()?;
    let g = h.shift_down(1)?;
    let h_prime = h.derivative()?;

    let mut hat = Vec::with_capacity(comps.len());
    for (i, ci) in comps.iter().enumerate() {
        let factor = positive_power(&g, &weight(i as u32, k))?;
        let pulled = ci.compose(&h)?;
        hat.push(pulled.checked_mul(&factor)?.checked_mul(&h_prime)?);
    }
    let round = |s: &TruncatedSeries1<BigFloat>| to_ring(s, precision);
    let leading = round(&hat[0]);
    let components = hat[1..].iter().map(round).collect();
    let out = NormalForm {
        kind: FormKind::FibrationForm,
        hamiltonian: nf.hamiltonian,
        components,
        smooth_mode: nf.smooth_mode,
        flipped: false,
        orientation_flipped,
        source_order: nf.source_order,
    };
    let change = FibrationChange {
        h: round(&h),
        fhat: round(&fhat),
        leading,
        precision,
    };
    Ok((out, change))
}

/// Undo [`fibration_form`]: `c~_i(t) = c^_i(P(t)) f^(t)^{(i+1)/k - 1/2} P'(t)`
/// with `P(t) = t f^(t)`. Returns the CH_FORM in the big-float ring.
pub fn fibration_inverse(
    fib: &NormalForm<BigFloat>,
    change: &FibrationChange,
) -> Result<NormalForm<BigFloat>, NormalFormError> {
    if fib.kind != FormKind::FibrationForm {
        return Err(NormalFormError::Mismatch(format!(
            "expected FIBRATION_FORM, got {:?}",
            fib.kind
        )));
    }
    let k = fib.k();
    let work = change.precision + GUARD_BITS;
    let fhat = to_ring(&change.fhat, work);
    let p = fhat.shift_up(1);
    let p_prime = p.derivative()?;
    let all: Vec<_> = std::iter::once(&change.leading)
        .chain(&fib.components)
        .map(|c| to_ring(c, work))
        .collect();
    let mut components = Vec::with_capacity(all.len());
    for (i, ci) in all.iter().enumerate() {
        let factor = positive_power(&fhat, &weight(i as u32, k))?;
        let mut ct = ci
            .compose(&p)?
            .checked_mul(&factor)?
            .checked_mul(&p_prime)?;
        if fib.orientation_flipped {
            ct = ct.neg();
        }
        components.push(to_ring(&ct, change.precision));
    }
    Ok(NormalForm {
        kind: FormKind::ChForm,
        hamiltonian: fib.hamiltonian,
        components,
        smooth_mode: fib.smooth_mode,
        flipped: false,
        orientation_flipped: false,
        source_order: fib.source_order,
    })
}
