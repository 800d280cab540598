//! Writing and reading WAV files in each supported sample format.

use tvolap::signals::{gen_sine, BinauralSurrogate};
use tvolap::wav::{read_wav, write_wav, WavFormat};

fn main() -> tvolap::Result<()> {
    let dir = std::env::temp_dir().join("tvolap-wav-example");
    std::fs::create_dir_all(&dir)?;

    let tone = gen_sine(750.0, 4800, 48000)?;
    for format in [WavFormat::Float32, WavFormat::Pcm24, WavFormat::Pcm16] {
        let path = dir.join(format!("tone-{format:?}.wav").to_lowercase());
        write_wav(&path, &tone, format)?;
        let back = read_wav(&path)?;
        let err = tone
            .channel(0)
            .iter()
            .zip(back.channel(0))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("{format:?}: {} bytes, max error {err:.2e}", std::fs::metadata(&path)?.len());
    }

    let hrir = BinauralSurrogate::hrir(90.0, 256, 48000, 1).build()?;
    let path = dir.join("hrir-90.wav");
    write_wav(&path, &hrir.clone().into(), WavFormat::Float32)?;
    let back = read_wav(&path)?;
    println!("{}: {} channels at {} Hz", path.display(), back.channel_count(), back.sample_rate());
    Ok(())
}
