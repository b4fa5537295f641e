# differentiation/management/commands/predict.py
from ...experiments import predict
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Мягкие оценки SZ для субъектов манифеста по сохранённой модели'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--model', help='Файл модели (model.json)')
        parser.add_argument('--manifest', help='Манифест субъектов (метки не обязательны)')
        parser.add_argument('--fs', type=float, help='Частота дискретизации, Гц')
        parser.add_argument('--fnc-table', dest='fnc_table', help='Кэш FNC из команды features')
        parser.add_argument('--out', help='CSV с оценками subject_id,score')

    def run(self):
        fnc_table = self.value('fnc_table')
        frame = predict(
            self.resolve(self.value('model', 'model.json')),
            self.resolve(self.value('manifest', 'manifest.csv')),
            self.resolve(self.value('out', 'scores.csv')),
            fs=self.value('fs'),
            fnc_table=self.resolve(fnc_table) if fnc_table else None,
        )
        self.success(f'Оценено {len(frame)} субъектов')
