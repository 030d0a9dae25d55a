//! `--disperse` flag grammar.
//!
//! ```text
//! uniform:<target>:<lo>:<hi>
//! normal_vector_cart:<target>:<std>[:<mean>]    std = s | sx,sy,sz; mean = x,y,z
//! ```

use orbitforge::montecarlo::{DispersionSpec, StdDev};

fn number(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn triple(s: &str) -> Result<[f64; 3], String> {
    let v = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected 3 comma-separated numbers, got {}", v.len()))
}

pub fn parse(text: &str) -> Result<DispersionSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let spec = match parts.as_slice() {
        ["uniform", target, lo, hi] => DispersionSpec::uniform(target, number(lo)?, number(hi)?),
        ["normal_vector_cart", target, std, rest @ ..] if rest.len() <= 1 => {
            let std = if std.contains(',') {
                StdDev::PerAxis(triple(std)?)
            } else {
                StdDev::Isotropic(number(std)?)
            };
            let mean = rest.first().map(|m| triple(m)).transpose()?;
            DispersionSpec::normal_vector_cart(target, mean, std)
        }
        _ => {
            return Err(format!(
                "bad dispersion `{text}`; expected uniform:<target>:<lo>:<hi> or normal_vector_cart:<target>:<std>[:<mean>]"
            ))
        }
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use orbitforge::montecarlo::Dispersion;

    #[test]
    fn uniform_form() {
        let s = parse("uniform:spacecraft.mass:700:800").unwrap();
        assert_eq!(s.target, "spacecraft.mass");
        assert_eq!(s.dist, Dispersion::Uniform { lo: 700.0, hi: 800.0 });
    }

    #[test]
    fn normal_forms() {
        let s = parse("normal_vector_cart:spacecraft.r_CN_N_init:1000").unwrap();
        assert_eq!(
            s.dist,
            Dispersion::NormalVectorCart {
                mean: None,
                std: StdDev::Isotropic(1000.0)
            }
        );
        let s = parse("normal_vector_cart:spacecraft.r_CN_N_init:1,2,3:7e6,0,0").unwrap();
        assert_eq!(
            s.dist,
            Dispersion::NormalVectorCart {
                mean: Some([7e6, 0.0, 0.0]),
                std: StdDev::PerAxis([1.0, 2.0, 3.0])
            }
        );
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse("uniform:spacecraft.mass:800:700").is_err());
        assert!(parse("uniform:spacecraft.mass:700").is_err());
        assert!(parse("gamma:spacecraft.mass:1:2").is_err());
        assert!(parse("normal_vector_cart:spacecraft.r_CN_N_init:1,2").is_err());
        assert!(parse("normal_vector_cart:spacecraft.mass:10").is_err());
        assert!(parse("uniform:spacecraft.mass:a:b")
            .unwrap_err()
            .contains("not a number"));
    }
}
