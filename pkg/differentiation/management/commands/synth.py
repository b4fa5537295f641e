# differentiation/management/commands/synth.py
from ...dataio import SynthConfig, generate_synthetic, write_dataset
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Генерирует синтетическую когорту SZ/BP: манифест и CSV-файлы ICN'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--n-subjects', type=int, dest='n_subjects', help='Число субъектов')
        parser.add_argument('--length', type=int, help='Длина рядов, отсчётов')
        parser.add_argument('--fs', type=float, help='Частота дискретизации, Гц')
        parser.add_argument('--balance', type=float, help='Доля SZ в когорте')
        parser.add_argument('--snr-db', type=float, dest='snr_db', help='SNR синусоиды класса, дБ')
        parser.add_argument('--latent-gain', type=float, dest='latent_gain', help='Усиление общего латентного источника')
        parser.add_argument('--out', help='Каталог для манифеста и файлов ICN')

    def run(self):
        synth = dict(self.file_config.get('synth') or {})
        for flag, key in (('n_subjects', 'n_subjects'), ('length', 'length'), ('fs', 'fs'),
                          ('balance', 'class_balance'), ('snr_db', 'snr_db'),
                          ('latent_gain', 'latent_gain'), ('seed', 'seed')):
            if self.options.get(flag) is not None:
                synth[key] = self.options[flag]
        cfg = SynthConfig.from_dict(synth)
        dataset = generate_synthetic(cfg)
        manifest = write_dataset(dataset, self.resolve(self.value('out', 'synthetic')))
        n_sz = int(dataset.labels().sum())
        self.success(f'Создано {len(dataset)} субъектов (SZ={n_sz}, BP={len(dataset) - n_sz}): {manifest}')
