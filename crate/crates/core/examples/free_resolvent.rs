//! Off-diagonal mass of the free resolvent between two half-spaces, exact
//! (closed form in 1D, certified quadrature in 2D/3D) against both bounds.

use heatbound::freespace::{offdiag_resolvent_exact, prop35_bound, prop35_theta_opt, remark36_bound, OffDiagonalSetup};
use heatbound::Result;

fn main() -> Result<()> {
    for d in 1..=3 {
        for (mu, r) in [(4.0, 1.0), (16.0, 0.25), (1.0, 4.0)] {
            let exact = offdiag_resolvent_exact(&OffDiagonalSetup::half_spaces(d, r, mu, 0.5))?;
            let theta = prop35_theta_opt(d, mu, r);
            let remark = remark36_bound(d, mu, r).map(|b| format!("{b:.6}")).unwrap_or_else(|_| "n/a".into());
            println!(
                "d={d} mu={mu:>4} r={r:>4}: exact {:.7} (+-{:.0e})  theta=1/2: {:.6}  best theta {:.3}: {:.6}  remark: {remark}",
                exact.value,
                exact.error,
                prop35_bound(d, mu, 0.5, r)?,
                theta,
                prop35_bound(d, mu, theta, r)?,
            );
        }
    }
    Ok(())
}
