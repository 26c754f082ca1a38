# Generated by Django 5.2.1 on 2026-10-19 09:30

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('scenario', models.CharField(max_length=20)),
                ('status', models.CharField(choices=[('success', 'Thành công'), ('error', 'Lỗi'), ('infeasible', 'Không khả thi')], max_length=12)),
                ('seed', models.CharField(default='0', help_text='Unsigned 64-bit run seed', max_length=20)),
                ('config', models.JSONField(default=dict, help_text='Cấu hình đầy đủ sau khi áp dụng mặc định')),
                ('summary', models.CharField(blank=True, max_length=500)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('files', models.JSONField(blank=True, default=list)),
                ('error_message', models.TextField(blank=True)),
                ('execution_time', models.FloatField(help_text='Time in seconds')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Simulation Run',
                'verbose_name_plural': 'Simulation Runs',
                'ordering': ['-created_at'],
            },
        ),
    ]
